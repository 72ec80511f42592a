use std::sync::Arc;

use super::{check_p, finish, lp, normalize, scaled_phi, EigenPair, SolveOptions};
use crate::error::{Error, Result};
use crate::geometry::GridDomain;
use crate::linalg::{dot, NormalMatrix};
use crate::operators::{BcKind, Laplacian, ScalarField};

/// Relative floor of the preconditioner weights `|Lu|^{p-2}`.
const WEIGHT_FLOOR: f64 = 1e-6;
const MAX_BACKTRACK: usize = 40;
const ARMIJO: f64 = 1e-4;

/// Preconditioned descent on `E(u) = ln ‖Lu‖_p − ln ‖u‖_p` for the clamped
/// problem. The preconditioner is the Gauss-Newton part of the Hessian of
/// `ln ‖Lu‖_p`, `(p−1)/J · L^T W diag(|Lu|^{p−2}) L`; at `p = 2` a unit step
/// is one inverse iteration of the discrete clamped bilaplacian.
#[derive(Debug)]
pub struct ClampedSolver {
    op: Laplacian,
    normal: NormalMatrix,
}

/// `E`, its gradient, and the max-scaled `Lu` with `Σ w |Lu/max|^p`.
struct Eval {
    energy: f64,
    grad: Vec<f64>,
    lu_scaled: Vec<f64>,
    lu_max: f64,
    j_scaled: f64,
}

impl ClampedSolver {
    pub fn new(domain: &Arc<GridDomain>) -> Result<Self> {
        let op = Laplacian::new(domain, BcKind::Clamped);
        let normal = NormalMatrix::new(op.matrix())?;
        Ok(ClampedSolver { op, normal })
    }

    pub fn domain(&self) -> &Arc<GridDomain> {
        self.op.domain()
    }

    /// Discrete clamped plate deflection under unit load, the default start.
    pub fn plate(&self) -> Result<Vec<f64>> {
        let chol = self.normal.factor(self.op.weights())?;
        Ok(chol.solve(&vec![1.0; self.op.num_interior()]))
    }

    fn energy(&self, u: &[f64], p: f64) -> f64 {
        let lu = self.op.apply(u);
        (self.op.lp_norm(&lu, p) / lp(u, p)).ln()
    }

    fn evaluate(&self, u: &[f64], p: f64) -> Eval {
        let lu = self.op.apply(u);
        let (s, ml) = scaled_phi(&lu, p);
        let (t, mu) = scaled_phi(u, p);
        let w = self.op.weights();
        let lu_scaled: Vec<f64> = lu.iter().map(|y| y / ml).collect();
        let jh: f64 = lu_scaled.iter().zip(w).map(|(y, w)| w * y.abs().powf(p)).sum();
        let gh: f64 = u.iter().map(|x| (x / mu).abs().powf(p)).sum();
        let n = u.len() as f64;
        let energy = (ml.ln() + (jh / n).ln() / p) - (mu.ln() + (gh / n).ln() / p);
        let lf = self.op.adjoint(&s);
        let grad = lf
            .iter()
            .zip(&t)
            .map(|(a, b)| a / (ml * jh) - b / (mu * gh))
            .collect();
        Eval {
            energy,
            grad,
            lu_scaled,
            lu_max: ml,
            j_scaled: jh,
        }
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
            None => self.plate()?,
        };
        let mut u = normalize(start, p).map_err(|_| Error::DegenerateField("initial field is zero"))?;
        let mut ev = self.evaluate(&u, p);
        if !ev.energy.is_finite() {
            return Err(Error::DegenerateField("initial field has zero Laplacian"));
        }
        let w = self.op.weights();
        let (mut change, mut residual) = (f64::INFINITY, f64::INFINITY);
        for it in 1..=opts.max_iter {
            let dw: Vec<f64> = ev
                .lu_scaled
                .iter()
                .zip(w)
                .map(|(y, w)| w * y.abs().powf(p - 2.0).max(WEIGHT_FLOOR))
                .collect();
            let chol = self.normal.factor(&dw)?;
            let c = ev.lu_max * ev.lu_max * ev.j_scaled / (p - 1.0);
            let mut dir = chol.solve(&ev.grad);
            dir.iter_mut().for_each(|d| *d *= -c);
            let slope = dot(&ev.grad, &dir);
            let mut accepted = None;
            if slope < 0.0 {
                let mut t = 1.0;
                for _ in 0..MAX_BACKTRACK {
                    let trial: Vec<f64> = u.iter().zip(&dir).map(|(a, b)| a + t * b).collect();
                    let e = self.energy(&trial, p);
                    if e.is_finite() && e <= ev.energy + ARMIJO * t * slope {
                        accepted = Some(trial);
                        break;
                    }
                    t *= 0.5;
                }
            }
            let Some(trial) = accepted else {
                // round-off floor: the current iterate may already be optimal
                let pair = finish(&self.op, u, p, it)?;
                if pair.el_residual < opts.tol {
                    return Ok(pair);
                }
                return Err(Error::NonDecrease { p, iteration: it });
            };
            u = normalize(trial, p)?;
            let next = self.evaluate(&u, p);
            change = (ev.energy - next.energy).abs();
            ev = next;
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

/// First clamped eigenpair at exponent `p` (plate start by default).
pub fn solve_clamped_p(
    domain: &Arc<GridDomain>,
    p: f64,
    init: Option<&ScalarField>,
    opts: &SolveOptions,
) -> Result<EigenPair> {
    ClampedSolver::new(domain)?.solve(p, init, opts)
}
