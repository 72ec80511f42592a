use super::{backward_error, lp, EigenPair};
use crate::error::{Error, Result};
use crate::operators::{BcKind, Laplacian, ScalarField};

/// Largest exponent of `e` representable before overflow.
const LOG_MAX: f64 = 709.0;

/// `f = |Δu|^{p-2} Δu / Λ^p` (with a trace in the clamped case) and
/// `g = |u|^{p-2} u`, with the residual of `Δ_h f = g` and their dual norms.
#[derive(Debug, Clone, PartialEq)]
pub struct DualFields {
    pub f: ScalarField,
    pub g: ScalarField,
    pub p: f64,
    /// Backward error of `Δ_h f = g` in the sense of the Euler-Lagrange
    /// residual of [`EigenPair`].
    pub poisson_residual: f64,
    pub f_dualnorm: f64,
    pub g_dualnorm: f64,
}

fn log_power(x: f64, e: f64, shift: f64, p: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    let l = e * x.abs().ln() - shift;
    if l > LOG_MAX {
        return Err(Error::DualOverflow { p });
    }
    Ok(x.signum() * l.exp())
}

pub fn extract_duals(pair: &EigenPair) -> Result<DualFields> {
    let p = pair.p;
    let q = p / (p - 1.0);
    let op = Laplacian::new(pair.domain(), pair.bc);
    let lu = op.apply(pair.u.values());
    let shift = p * pair.lambda.ln();
    let f: Vec<f64> = lu
        .iter()
        .map(|&y| log_power(y, p - 1.0, shift, p))
        .collect::<Result<_>>()?;
    let g: Vec<f64> = pair
        .u
        .values()
        .iter()
        .map(|&x| log_power(x, p - 1.0, 0.0, p))
        .collect::<Result<_>>()?;
    let poisson_residual = backward_error(&op, &f, &g);
    let f_dualnorm = op.lp_norm(&f, q);
    let g_dualnorm = lp(&g, q);
    Ok(DualFields {
        f: op.to_field(f)?,
        g: ScalarField::new(pair.domain().clone(), g)?,
        p,
        poisson_residual,
        f_dualnorm,
        g_dualnorm,
    })
}

/// Pointwise checks of the limiting structure on `{|f| > ε_f}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureReport {
    pub eps_f: f64,
    pub sign_set_fraction: f64,
    /// `max |Δu/Λ − sign f|` over the sign set, 0 when it is empty.
    pub inclusion_violation: f64,
    /// `(max Δu − min Δu)/Λ` over the positive and the negative part of the
    /// sign set.
    pub laplacian_spread: [f64; 2],
    /// Relative standard deviation of `Δu` over the interior (hinged only).
    pub hinged_constancy: Option<f64>,
}

/// Default threshold `1e-3 · max |f|`.
pub fn default_eps_f(duals: &DualFields) -> f64 {
    1e-3 * duals.f.max_abs()
}

pub fn structure_report(pair: &EigenPair, duals: &DualFields, eps_f: f64) -> StructureReport {
    let op = Laplacian::new(pair.domain(), pair.bc);
    let lu = op.apply(pair.u.values());
    let mut f = duals.f.values().to_vec();
    f.extend_from_slice(duals.f.trace().unwrap_or(&[]));
    let lambda = pair.lambda;
    let mut count = 0usize;
    let mut violation = 0.0f64;
    let mut ranges = [(f64::INFINITY, f64::NEG_INFINITY); 2];
    for (&y, &fv) in lu.iter().zip(&f) {
        if fv.abs() <= eps_f {
            continue;
        }
        count += 1;
        let s = fv.signum();
        violation = violation.max((y / lambda - s).abs());
        let r = &mut ranges[if s > 0.0 { 0 } else { 1 }];
        r.0 = r.0.min(y);
        r.1 = r.1.max(y);
    }
    let spread = ranges.map(|(lo, hi)| if hi >= lo { (hi - lo) / lambda } else { 0.0 });
    let hinged_constancy = (pair.bc == BcKind::Hinged).then(|| {
        let n = lu.len() as f64;
        let mean = lu.iter().sum::<f64>() / n;
        let var = lu.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
        var.sqrt() / mean.abs()
    });
    StructureReport {
        eps_f,
        sign_set_fraction: count as f64 / lu.len() as f64,
        inclusion_violation: violation,
        laplacian_spread: spread,
        hinged_constancy,
    }
}
