use std::sync::Arc;

use super::{ClampedSolver, EigenPair, HingedSolver, SolveOptions};
use crate::error::{Error, Result};
use crate::geometry::GridDomain;
use crate::operators::BcKind;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub p: f64,
    pub lambda: f64,
    pub el_residual: f64,
    pub iterations: usize,
}

/// Eigenpairs along an increasing exponent schedule and the extrapolated
/// limit `a` of the fit `Λ_p ≈ a + b/p`.
#[derive(Debug, Clone)]
pub struct ContinuationTrace {
    pub bc: BcKind,
    pub entries: Vec<TraceEntry>,
    pub lambda_inf_estimate: f64,
    pub fit_coeffs: (f64, f64),
    /// Number of trailing entries used by the fit.
    pub fit_window: usize,
    pub pairs: Vec<EigenPair>,
}

impl ContinuationTrace {
    pub fn terminal_pair(&self) -> &EigenPair {
        self.pairs.last().expect("trace is never empty")
    }
}

/// Trailing window of the fit: the upper half of the schedule (the middle
/// entry of an odd schedule excluded), and at least two points when there
/// are two.
pub fn fit_window(n: usize) -> usize {
    (n / 2).max(n.min(2))
}

/// Least-squares `(a, b)` with `Λ ≈ a + b/p`; a single point gives `(Λ, 0)`.
pub fn fit_inverse_p(points: &[(f64, f64)]) -> (f64, f64) {
    match points {
        [] => (f64::NAN, f64::NAN),
        [(_, l)] => (*l, 0.0),
        _ => {
            let n = points.len() as f64;
            let mx = points.iter().map(|(p, _)| 1.0 / p).sum::<f64>() / n;
            let my = points.iter().map(|(_, l)| l).sum::<f64>() / n;
            let sxy: f64 = points.iter().map(|(p, l)| (1.0 / p - mx) * (l - my)).sum();
            let sxx: f64 = points.iter().map(|(p, _)| (1.0 / p - mx).powi(2)).sum();
            let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
            (my - b * mx, b)
        }
    }
}

/// Solves along `schedule`, warm-starting each exponent from the previous
/// eigenfunction.
pub fn continuation(
    domain: &Arc<GridDomain>,
    bc: BcKind,
    schedule: &[f64],
    opts: &SolveOptions,
) -> Result<ContinuationTrace> {
    if schedule.is_empty() {
        return Err(Error::InvalidArgument("empty p schedule".into()));
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("p schedule must be strictly increasing".into()));
    }
    enum Solver {
        Hinged(HingedSolver),
        Clamped(ClampedSolver),
    }
    let solver = match bc {
        BcKind::Hinged => Solver::Hinged(HingedSolver::new(domain)?),
        BcKind::Clamped => Solver::Clamped(ClampedSolver::new(domain)?),
    };
    let mut pairs: Vec<EigenPair> = Vec::with_capacity(schedule.len());
    for &p in schedule {
        let init = pairs.last().map(|pair| &pair.u);
        let pair = match &solver {
            Solver::Hinged(s) => s.solve(p, init, opts),
            Solver::Clamped(s) => s.solve(p, init, opts),
        }
        .map_err(|e| Error::Continuation {
            p,
            source: Box::new(e),
        })?;
        pairs.push(pair);
    }
    let entries: Vec<TraceEntry> = pairs
        .iter()
        .map(|q| TraceEntry {
            p: q.p,
            lambda: q.lambda,
            el_residual: q.el_residual,
            iterations: q.iterations,
        })
        .collect();
    let window = fit_window(entries.len());
    let points: Vec<(f64, f64)> = entries[entries.len() - window..]
        .iter()
        .map(|e| (e.p, e.lambda))
        .collect();
    let fit_coeffs = fit_inverse_p(&points);
    Ok(ContinuationTrace {
        bc,
        entries,
        lambda_inf_estimate: fit_coeffs.0,
        fit_coeffs,
        fit_window: window,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_exact_model() {
        let pts: Vec<(f64, f64)> = [16.0, 32.0, 64.0, 128.0]
            .iter()
            .map(|&p| (p, 4.0 + 3.0 / p))
            .collect();
        let (a, b) = fit_inverse_p(&pts);
        assert!((a - 4.0).abs() < 1e-12 && (b - 3.0).abs() < 1e-10);
        assert_eq!(fit_inverse_p(&[(2.0, 5.5)]), (5.5, 0.0));
    }

    #[test]
    fn window_sizes() {
        assert_eq!(fit_window(1), 1);
        assert_eq!(fit_window(2), 2);
        assert_eq!(fit_window(3), 2);
        assert_eq!(fit_window(7), 3);
        assert_eq!(fit_window(8), 4);
    }
}
