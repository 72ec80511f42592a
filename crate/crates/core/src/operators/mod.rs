//! Discrete Laplacians, Poisson solves and normalized Lebesgue norms on grid
//! domains.
//!
//! Both boundary conventions share the five-point (three-point in 1D) stencil
//! at interior nodes with zero values on the boundary nodes. The clamped
//! convention additionally evaluates the Laplacian on the boundary nodes,
//! where the first exterior ghost mirrors the interior neighbour across the
//! boundary node; those values form the *trace* of the field and carry weight
//! [`TRACE_WEIGHT`] in every norm. This is how the zero normal derivative
//! enters the discrete Rayleigh quotient.

mod radial;

pub use radial::{radial_laplacian, radial_poisson_solve, RadialField};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::GridDomain;
use crate::linalg::{residual_norm, Cholesky, CsrMatrix};

/// Quadrature weight of a boundary-node value relative to an interior node.
pub const TRACE_WEIGHT: f64 = 0.5;

/// Relative residual every Poisson solve must meet.
pub const POISSON_RESIDUAL_BOUND: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BcKind {
    /// `u = 0` on the boundary.
    Hinged,
    /// `u = |Du| = 0` on the boundary.
    Clamped,
}

impl BcKind {
    pub fn name(self) -> &'static str {
        match self {
            BcKind::Hinged => "hinged",
            BcKind::Clamped => "clamped",
        }
    }

    pub fn from_name(s: &str) -> Option<BcKind> {
        match s {
            "hinged" => Some(BcKind::Hinged),
            "clamped" => Some(BcKind::Clamped),
            _ => None,
        }
    }
}

/// Real values on the interior nodes of a grid domain, optionally with values
/// on its boundary nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    domain: Arc<GridDomain>,
    values: Vec<f64>,
    trace: Option<Vec<f64>>,
}

impl ScalarField {
    pub fn new(domain: Arc<GridDomain>, values: Vec<f64>) -> Result<Self> {
        Self::build(domain, values, None)
    }

    pub fn with_trace(domain: Arc<GridDomain>, values: Vec<f64>, trace: Vec<f64>) -> Result<Self> {
        Self::build(domain, values, Some(trace))
    }

    fn build(domain: Arc<GridDomain>, values: Vec<f64>, trace: Option<Vec<f64>>) -> Result<Self> {
        if values.len() != domain.num_interior() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values for {} interior nodes",
                values.len(),
                domain.num_interior()
            )));
        }
        if let Some(t) = &trace {
            if t.len() != domain.num_boundary() {
                return Err(Error::InvalidArgument(format!(
                    "trace has {} values for {} boundary nodes",
                    t.len(),
                    domain.num_boundary()
                )));
            }
        }
        let all_finite = values
            .iter()
            .chain(trace.iter().flatten())
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidArgument("field contains non-finite values".into()));
        }
        Ok(ScalarField {
            domain,
            values,
            trace,
        })
    }

    pub fn constant(domain: Arc<GridDomain>, c: f64) -> Self {
        let n = domain.num_interior();
        ScalarField {
            domain,
            values: vec![c; n],
            trace: None,
        }
    }

    /// Samples `f` at the interior node coordinates.
    pub fn from_fn(domain: Arc<GridDomain>, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values = domain.interior_coords().into_iter().map(f).collect();
        Self::new(domain, values)
    }

    pub fn domain(&self) -> &Arc<GridDomain> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn trace(&self) -> Option<&[f64]> {
        self.trace.as_deref()
    }

    pub fn into_parts(self) -> (Vec<f64>, Option<Vec<f64>>) {
        (self.values, self.trace)
    }

    /// Largest absolute value, trace included.
    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .chain(self.trace.iter().flatten())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Values on the full lattice: interior values, trace values on boundary
    /// nodes (zero without a trace), zero elsewhere. Row-major.
    pub fn lattice_values(&self) -> Vec<f64> {
        let d = &self.domain;
        let (nx, ny) = d.lattice_shape();
        let mut out = vec![0.0; nx * ny];
        for (&l, &v) in d.interior_nodes().iter().zip(&self.values) {
            out[l] = v;
        }
        if let Some(t) = &self.trace {
            for (&l, &v) in d.boundary_nodes().iter().zip(t) {
                out[l] = v;
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            domain: self.domain.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            trace: self.trace.as_ref().map(|t| t.iter().map(|&v| f(v)).collect()),
        }
    }
}

/// Normalized `L^p(Ω, λ)` norm of raw values: `(Σ w_i |v_i|^p / count)^{1/p}`
/// for finite `p` and `max |v_i|` for `p = ∞`. The largest magnitude is
/// factored out before powering.
pub fn weighted_lp_norm(values: &[f64], weights: Option<&[f64]>, count: f64, p: f64) -> f64 {
    let m = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return m;
    }
    let sum: f64 = match weights {
        Some(w) => values
            .iter()
            .zip(w)
            .map(|(v, w)| w * (v.abs() / m).powf(p))
            .sum(),
        None => values.iter().map(|v| (v.abs() / m).powf(p)).sum(),
    };
    m * (sum / count).powf(1.0 / p)
}

/// Normalized `L^p(Ω, λ)` norm: mean over interior nodes of `|u|^p` (trace
/// values, when present, add with weight [`TRACE_WEIGHT`]), to the power
/// `1/p`; the maximum of `|u|` for `p = ∞`.
pub fn norm_lp_lambda(u: &ScalarField, p: f64) -> f64 {
    let count = u.values.len() as f64;
    match &u.trace {
        None => weighted_lp_norm(&u.values, None, count, p),
        Some(t) => {
            let mut all = u.values.clone();
            all.extend_from_slice(t);
            let mut w = vec![1.0; u.values.len()];
            w.extend(std::iter::repeat_n(TRACE_WEIGHT, t.len()));
            weighted_lp_norm(&all, Some(&w), count, p)
        }
    }
}

/// The discrete Laplacian of a domain under one boundary convention, as a
/// sparse matrix from interior values to evaluation-node values (interior
/// nodes, followed by boundary nodes in the clamped case).
#[derive(Debug, Clone)]
pub struct Laplacian {
    domain: Arc<GridDomain>,
    bc: BcKind,
    matrix: CsrMatrix,
    weights: Vec<f64>,
}

impl Laplacian {
    pub fn new(domain: &Arc<GridDomain>, bc: BcKind) -> Self {
        let d = domain.as_ref();
        let inv_h2 = 1.0 / (d.h() * d.h());
        let center = -2.0 * d.dim() as f64 * inv_h2;
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(d.num_interior());
        for &l in d.interior_nodes() {
            let mut row = vec![(d.interior_index(l).unwrap(), center)];
            for m in d.neighbors(l) {
                if let Some(k) = d.interior_index(m) {
                    row.push((k, inv_h2));
                }
            }
            rows.push(row);
        }
        let mut weights = vec![1.0; rows.len()];
        if bc == BcKind::Clamped {
            let (nx, ny) = d.lattice_shape();
            for &b in d.boundary_nodes() {
                let (bi, bj) = ((b % nx) as isize, (b / nx) as isize);
                let mut row = Vec::new();
                let dirs: &[(isize, isize)] = if d.dim() == 1 {
                    &[(1, 0), (-1, 0)]
                } else {
                    &[(1, 0), (-1, 0), (0, 1), (0, -1)]
                };
                let at = |i: isize, j: isize| -> Option<usize> {
                    (i >= 0 && j >= 0 && (i as usize) < nx && (j as usize) < ny)
                        .then(|| j as usize * nx + i as usize)
                };
                for &(di, dj) in dirs {
                    let Some(m) = at(bi + di, bj + dj) else { continue };
                    if let Some(k) = d.interior_index(m) {
                        row.push((k, inv_h2));
                    } else if d.boundary_index(m).is_none() {
                        // exterior ghost mirrors the opposite neighbour
                        if let Some(k) = at(bi - di, bj - dj).and_then(|g| d.interior_index(g)) {
                            row.push((k, inv_h2));
                        }
                    }
                }
                rows.push(row);
                weights.push(TRACE_WEIGHT);
            }
        }
        Laplacian {
            domain: domain.clone(),
            bc,
            matrix: CsrMatrix::from_rows(d.num_interior(), rows),
            weights,
        }
    }

    pub fn domain(&self) -> &Arc<GridDomain> {
        &self.domain
    }

    pub fn bc(&self) -> BcKind {
        self.bc
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Quadrature weight of each evaluation node.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn num_interior(&self) -> usize {
        self.domain.num_interior()
    }

    /// Laplacian values at the evaluation nodes.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.matrix.apply(u)
    }

    /// `L^T W f`: the discrete Laplacian applied in the sense of
    /// distributions to a field living on the evaluation nodes.
    pub fn adjoint(&self, f: &[f64]) -> Vec<f64> {
        let wf: Vec<f64> = f.iter().zip(&self.weights).map(|(v, w)| v * w).collect();
        self.matrix.apply_transpose(&wf)
    }

    /// `|L|^T W |f|`, the magnitude scale of [`Laplacian::adjoint`] used to
    /// normalize residuals.
    pub fn abs_adjoint(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_interior()];
        for (r, (fv, w)) in f.iter().zip(&self.weights).enumerate() {
            let s = (fv * w).abs();
            for (c, a) in self.matrix.row(r) {
                out[c] += a.abs() * s;
            }
        }
        out
    }

    /// Normalized `L^p(λ)` norm of evaluation-node values.
    pub fn lp_norm(&self, values: &[f64], p: f64) -> f64 {
        let w = (self.bc == BcKind::Clamped).then_some(self.weights.as_slice());
        weighted_lp_norm(values, w, self.num_interior() as f64, p)
    }

    /// Splits evaluation-node values into a field with a trace (clamped) or
    /// a plain interior field (hinged).
    pub fn to_field(&self, values: Vec<f64>) -> Result<ScalarField> {
        let n = self.num_interior();
        match self.bc {
            BcKind::Hinged => ScalarField::new(self.domain.clone(), values),
            BcKind::Clamped => {
                let mut interior = values;
                let trace = interior.split_off(n);
                ScalarField::with_trace(self.domain.clone(), interior, trace)
            }
        }
    }
}

/// Discrete Laplacian of `u`. Hinged: five-point stencil with zero boundary
/// and ghost values; clamped: additionally the boundary-node values with
/// mirrored ghosts, returned as the trace of the result.
pub fn laplacian(u: &ScalarField, bc: BcKind) -> ScalarField {
    let op = Laplacian::new(u.domain(), bc);
    op.to_field(op.apply(u.values()))
        .expect("Laplacian of a finite field is finite")
}

/// Factorized `-Δ_h` with zero Dirichlet data on a grid domain.
#[derive(Debug)]
pub struct PoissonSolver {
    domain: Arc<GridDomain>,
    neg_laplacian: CsrMatrix,
    factor: Cholesky,
}

impl PoissonSolver {
    pub fn new(domain: &Arc<GridDomain>) -> Result<Self> {
        let lap = Laplacian::new(domain, BcKind::Hinged);
        let neg_laplacian = lap.matrix().scaled(-1.0);
        let factor = Cholesky::new(&neg_laplacian)?;
        Ok(PoissonSolver {
            domain: domain.clone(),
            neg_laplacian,
            factor,
        })
    }

    pub fn domain(&self) -> &Arc<GridDomain> {
        &self.domain
    }

    /// The matrix of `-Δ_h` (symmetric positive definite).
    pub fn matrix(&self) -> &CsrMatrix {
        &self.neg_laplacian
    }

    /// Solves `-Δ_h v = rhs`, refining until the relative residual meets
    /// [`POISSON_RESIDUAL_BOUND`].
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let bnorm = crate::linalg::norm2(rhs);
        let mut x = self.factor.solve(rhs);
        if bnorm == 0.0 {
            return Ok(x);
        }
        for _ in 0..3 {
            let res = residual_norm(&self.neg_laplacian, &x, rhs) / bnorm;
            if res <= POISSON_RESIDUAL_BOUND {
                return Ok(x);
            }
            let ax = self.neg_laplacian.apply(&x);
            let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
            let dx = self.factor.solve(&r);
            x.iter_mut().zip(&dx).for_each(|(x, d)| *x += d);
        }
        let res = residual_norm(&self.neg_laplacian, &x, rhs) / bnorm;
        if res <= POISSON_RESIDUAL_BOUND {
            Ok(x)
        } else {
            Err(Error::LinearSolve {
                residual: res,
                bound: POISSON_RESIDUAL_BOUND,
            })
        }
    }

    pub fn solve_field(&self, rhs: &ScalarField) -> Result<ScalarField> {
        ScalarField::new(self.domain.clone(), self.solve(rhs.values())?)
    }
}

/// Solves `-Δ_h v = rhs` with `v = 0` on the boundary nodes.
pub fn poisson_solve(rhs: &ScalarField) -> Result<ScalarField> {
    PoissonSolver::new(rhs.domain())?.solve_field(rhs)
}

/// Torsion function of a domain: `-Δ_h v = 1`, `v = 0` on the boundary.
pub fn torsion(domain: &Arc<GridDomain>) -> Result<ScalarField> {
    poisson_solve(&ScalarField::constant(domain.clone(), 1.0))
}
