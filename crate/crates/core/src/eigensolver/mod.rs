//! First eigenpairs of the discrete p-Bilaplacian, p-continuation, dual
//! fields and structure checks.
//!
//! A pair `(u, Λ)` is normalized by `‖u‖_{L^p(λ)} = 1` and satisfies the
//! discrete Euler-Lagrange system `L^T W f = g` with
//! `f = |Lu|^{p-2} Lu / Λ^p` and `g = |u|^{p-2} u`, where `L` is the
//! [`Laplacian`] of the boundary convention and `W` its quadrature weights.
//! For hinged data `L` is symmetric and `W = I`, so this reads `Δ_h f = g`.

mod clamped;
mod continuation;
mod duals;
mod hinged;

pub use clamped::{solve_clamped_p, ClampedSolver};
pub use continuation::{continuation, fit_inverse_p, fit_window, ContinuationTrace, TraceEntry};
pub use duals::{default_eps_f, extract_duals, structure_report, DualFields, StructureReport};
pub use hinged::{solve_hinged_p, HingedSolver};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::GridDomain;
use crate::linalg::norm2;
use crate::operators::{weighted_lp_norm, BcKind, Laplacian, ScalarField};

/// Supported exponent range of the finite-p solvers.
pub const P_MIN: f64 = 2.0;
pub const P_MAX: f64 = 256.0;

/// One finite-p eigenpair.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub u: ScalarField,
    pub lambda: f64,
    pub p: f64,
    pub bc: BcKind,
    pub el_residual: f64,
    pub iterations: usize,
}

impl EigenPair {
    pub fn domain(&self) -> &Arc<GridDomain> {
        self.u.domain()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Bound on both the relative change of Λ between iterations and the
    /// Euler-Lagrange residual.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-8,
            max_iter: 2000,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolveOptions {
            tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("iteration cap must be positive".into()));
        }
        Ok(())
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(P_MIN..=P_MAX).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "p = {p} outside the supported range [{P_MIN}, {P_MAX}]"
        )));
    }
    Ok(())
}

/// `|x|^{p-2} x`.
pub fn phi(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(p - 1.0)
    }
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `phi(v / max|v|)` together with `max|v|`.
pub(crate) fn scaled_phi(v: &[f64], p: f64) -> (Vec<f64>, f64) {
    let m = max_abs(v);
    if m == 0.0 {
        return (vec![0.0; v.len()], 0.0);
    }
    (v.iter().map(|&x| phi(x / m, p)).collect(), m)
}

/// Interior-node λ-norm.
pub(crate) fn lp(values: &[f64], p: f64) -> f64 {
    weighted_lp_norm(values, None, values.len() as f64, p)
}

/// Rescales to unit λ-norm and orients the node of largest magnitude to be
/// positive.
pub(crate) fn normalize(mut u: Vec<f64>, p: f64) -> Result<Vec<f64>> {
    let norm = lp(&u, p);
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::DegenerateField("iterate vanished"));
    }
    let mut imax = 0;
    for (i, v) in u.iter().enumerate() {
        if v.abs() > u[imax].abs() {
            imax = i;
        }
    }
    let s = if u[imax] < 0.0 { -1.0 / norm } else { 1.0 / norm };
    u.iter_mut().for_each(|v| *v *= s);
    Ok(u)
}

/// Backward error of the Euler-Lagrange system,
/// `‖L^T W f − g‖₂ / (‖|L|^T W |f|‖₂ + ‖g‖₂)`. Both terms are O(1) near a
/// solution while `L^T W f` carries cancellation of order `‖L‖²`, so the
/// plain relative residual stalls far above round-off on fine grids.
pub(crate) fn backward_error(op: &Laplacian, f: &[f64], g: &[f64]) -> f64 {
    let lf = op.adjoint(f);
    let r: Vec<f64> = lf.iter().zip(g).map(|(a, b)| a - b).collect();
    let scale = norm2(&op.abs_adjoint(f)) + norm2(g);
    if scale > 0.0 {
        norm2(&r) / scale
    } else {
        0.0
    }
}

/// [`backward_error`] of a normalized `u` with `Lu` and `Λ = ‖Lu‖_p`,
/// evaluated with max-scaled powers.
pub(crate) fn el_residual(op: &Laplacian, u: &[f64], lu: &[f64], lambda: f64, p: f64) -> f64 {
    let (g, mu) = scaled_phi(u, p);
    let (s, ml) = scaled_phi(lu, p);
    if mu == 0.0 || ml == 0.0 {
        return f64::INFINITY;
    }
    // f = c * s / mu^{p-1} with c = ml^{p-1} / Λ^p, compared against g
    let log_c = (p - 1.0) * (ml.ln() - mu.ln()) - p * lambda.ln();
    let c = log_c.exp();
    if !(c.is_finite() && c > 0.0) {
        return f64::INFINITY;
    }
    let f: Vec<f64> = s.iter().map(|v| c * v).collect();
    backward_error(op, &f, &g)
}

/// Builds the pair from a converged iterate, recomputing Λ as the quotient of
/// the normalized field.
pub(crate) fn finish(
    op: &Laplacian,
    u: Vec<f64>,
    p: f64,
    iterations: usize,
) -> Result<EigenPair> {
    let u = normalize(u, p)?;
    let lu = op.apply(&u);
    let lambda = op.lp_norm(&lu, p);
    let el_residual = el_residual(op, &u, &lu, lambda, p);
    Ok(EigenPair {
        u: ScalarField::new(op.domain().clone(), u)?,
        lambda,
        p,
        bc: op.bc(),
        el_residual,
        iterations,
    })
}

/// Rayleigh quotient `‖Lu‖_p / ‖u‖_p` of an arbitrary interior field.
pub fn rayleigh_quotient(u: &ScalarField, bc: BcKind, p: f64) -> f64 {
    let op = Laplacian::new(u.domain(), bc);
    op.lp_norm(&op.apply(u.values()), p) / lp(u.values(), p)
}
