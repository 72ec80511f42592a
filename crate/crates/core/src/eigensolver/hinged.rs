use std::sync::Arc;

use super::{check_p, finish, lp, max_abs, normalize, phi, scaled_phi, EigenPair, SolveOptions};
use crate::error::{Error, Result};
use crate::geometry::GridDomain;
use crate::linalg::dot;
use crate::operators::{BcKind, Laplacian, PoissonSolver, ScalarField};

/// Inverse-power iteration for the hinged problem. The Euler-Lagrange system
/// decouples into two Poisson problems with zero Dirichlet data, so one
/// factorization serves every exponent.
#[derive(Debug)]
pub struct HingedSolver {
    op: Laplacian,
    poisson: PoissonSolver,
}

impl HingedSolver {
    pub fn new(domain: &Arc<GridDomain>) -> Result<Self> {
        Ok(HingedSolver {
            op: Laplacian::new(domain, BcKind::Hinged),
            poisson: PoissonSolver::new(domain)?,
        })
    }

    pub fn domain(&self) -> &Arc<GridDomain> {
        self.op.domain()
    }

    /// Torsion function, the default starting field.
    pub fn torsion(&self) -> Result<Vec<f64>> {
        self.poisson.solve(&vec![1.0; self.op.num_interior()])
    }

    /// Solves `Δ_h x = rhs`.
    fn laplace_solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut x = self.poisson.solve(rhs)?;
        x.iter_mut().for_each(|v| *v = -*v);
        Ok(x)
    }

    pub fn solve(&self, p: f64, init: Option<&ScalarField>, opts: &SolveOptions) -> Result<EigenPair> {
        check_p(p)?;
        opts.validate()?;
        let start = match init {
            Some(f) => {
                if f.domain().as_ref() != self.domain().as_ref() {
                    return Err(Error::InvalidArgument("initial field lives on another domain".into()));
                }
                f.values().to_vec()
            }
            None => self.torsion()?,
        };
        let mut u = normalize(start, p).map_err(|_| Error::DegenerateField("initial field is zero"))?;
        let q = p / (p - 1.0);
        let mut lambda_prev = f64::NAN;
        let (mut change, mut residual) = (f64::INFINITY, f64::INFINITY);
        for it in 1..=opts.max_iter {
            let (g, _) = scaled_phi(&u, p);
            let v = self.laplace_solve(&g)?;
            let vmax = max_abs(&v);
            if vmax == 0.0 {
                return Err(Error::DegenerateField("Poisson solve returned zero"));
            }
            let z: Vec<f64> = v.iter().map(|&x| phi(x / vmax, q)).collect();
            let w = self.laplace_solve(&z)?;
            let lambda = lp(&z, p) / lp(&w, p);
            let mut next = normalize(w, p)?;
            if dot(&next, &u) < 0.0 {
                next.iter_mut().for_each(|x| *x = -*x);
            }
            u = next;
            change = ((lambda - lambda_prev) / lambda_prev).abs();
            lambda_prev = lambda;
            if change < opts.tol {
                let pair = finish(&self.op, u.clone(), p, it)?;
                residual = pair.el_residual;
                if residual < opts.tol {
                    return Ok(pair);
                }
            }
        }
        Err(Error::IterationCap {
            p,
            iterations: opts.max_iter,
            change,
            residual,
        })
    }
}

/// First hinged eigenpair at exponent `p` (torsion start by default).
pub fn solve_hinged_p(
    domain: &Arc<GridDomain>,
    p: f64,
    init: Option<&ScalarField>,
    opts: &SolveOptions,
) -> Result<EigenPair> {
    HingedSolver::new(domain)?.solve(p, init, opts)
}
