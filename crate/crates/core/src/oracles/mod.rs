//! Closed-form ball eigenpairs and rearrangement procedures.

mod bathtub;
mod symmetrize;

pub use bathtub::{bathtub_maximize, bathtub_values, BathtubResult};
pub use symmetrize::{ball_grid, schwarz_symmetrize, talenti_compare, Symmetrizer, TalentiReport};

use crate::error::{Error, Result};
use crate::io::{num, Table};

/// `(R² − r²)/(2n)`, the hinged ball eigenfunction (torsion function).
pub fn torsion_ball(n: usize, radius: f64, r: f64) -> Result<f64> {
    check_dim(n)?;
    check_radius(radius)?;
    if !(0.0..=radius).contains(&r) {
        return Err(Error::InvalidArgument(format!("r = {r} outside [0, {radius}]")));
    }
    Ok((radius * radius - r * r) / (2.0 * n as f64))
}

/// `2n / R²`.
pub fn hinged_ball_lambda(n: usize, radius: f64) -> f64 {
    2.0 * n as f64 / (radius * radius)
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    Ok(())
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    Ok(())
}

/// The two-level load `f_R` (`+1` inside the break radius, `−1` outside) on
/// `B_R ⊆ B_1` and its Dirichlet potential `w_R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampedProfileParams {
    n: usize,
    radius: f64,
}

impl ClampedProfileParams {
    /// Requires `n ≥ 1` and `0 < R ≤ 1`.
    pub fn new(n: usize, radius: f64) -> Result<Self> {
        check_dim(n)?;
        check_radius(radius)?;
        if radius > 1.0 {
            return Err(Error::InvalidArgument(format!(
                "profile radius must lie in (0, 1], got {radius}"
            )));
        }
        Ok(ClampedProfileParams { n, radius })
    }

    pub fn unit(n: usize) -> Result<Self> {
        Self::new(n, 1.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `2^{-1/n}`, where the load changes sign.
    pub fn break_radius(&self) -> f64 {
        2f64.powf(-1.0 / self.n as f64)
    }

    /// The load `f_R(r)`.
    pub fn load(&self, r: f64) -> f64 {
        if r <= self.break_radius() {
            1.0
        } else {
            -1.0
        }
    }
}

/// `w_R(r)`, the solution of `−Δw = f_R` in `B_R`, `w = 0` on the sphere.
/// For `n = 1` and `R = 1` this is the piecewise quadratic clamped interval
/// profile.
pub fn clamped_profile_w(params: &ClampedProfileParams, r: f64) -> Result<f64> {
    let (n, big_r) = (params.n, params.radius);
    if !(0.0..=big_r).contains(&r) {
        return Err(Error::InvalidArgument(format!("r = {r} outside [0, {big_r}]")));
    }
    let nf = n as f64;
    let rho = params.break_radius();
    if big_r <= rho {
        return Ok((big_r * big_r - r * r) / (2.0 * nf));
    }
    let w = match n {
        1 => {
            if r <= rho {
                big_r - big_r * big_r / 2.0 - 0.25 - r * r / 2.0
            } else {
                r * r / 2.0 - r - big_r * big_r / 2.0 + big_r
            }
        }
        2 => {
            if r <= rho {
                0.25 - big_r * big_r / 4.0 + big_r.ln() / 2.0 + 2f64.ln() / 4.0 - r * r / 4.0
            } else {
                r * r / 4.0 - r.ln() / 2.0 - big_r * big_r / 4.0 + big_r.ln() / 2.0
            }
        }
        _ => {
            let k = nf * (nf - 2.0);
            if r <= rho {
                2f64.powf(-2.0 / nf) / nf - big_r * big_r / (2.0 * nf) - big_r.powf(2.0 - nf) / k
                    + 2f64.powf(1.0 - 2.0 / nf) / k
                    - r * r / (2.0 * nf)
            } else {
                r * r / (2.0 * nf) + r.powf(2.0 - nf) / k
                    - big_r * big_r / (2.0 * nf)
                    - big_r.powf(2.0 - nf) / k
            }
        }
    };
    Ok(w)
}

/// Closed form of `Λ_∞^C(B_1)`: `4` for `n = 1`, `4/ln 2` for `n = 2`,
/// `2^{2/n}(n−2)/(1 − 2^{2/n−1})` for `n ≥ 3`.
fn clamped_unit_lambda(n: usize) -> f64 {
    match n {
        1 => 4.0,
        2 => 4.0 / 2f64.ln(),
        _ => {
            let nf = n as f64;
            2f64.powf(2.0 / nf) * (nf - 2.0) / (1.0 - 2f64.powf(2.0 / nf - 1.0))
        }
    }
}

/// `Λ_∞^C(B_R) = 1/(R² w_1(0))`.
pub fn clamped_ball_lambda(n: usize, radius: f64) -> f64 {
    let closed = clamped_unit_lambda(n);
    debug_assert!({
        let w0 = clamped_profile_w(&ClampedProfileParams::unit(n).unwrap(), 0.0).unwrap();
        (closed * w0 - 1.0).abs() < 1e-10
    });
    closed / (radius * radius)
}

/// `w_1` of dimension `n` sampled at `samples` equispaced radii on `[0, 1]`.
pub fn clamped_profile_table(n: usize, samples: usize) -> Result<Table> {
    let params = ClampedProfileParams::unit(n)?;
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let mut t = Table::new(["r", "w", "load"]);
    for i in 0..samples {
        let r = i as f64 / (samples - 1) as f64;
        t.push(vec![
            num(r),
            num(clamped_profile_w(&params, r)?),
            num(params.load(r)),
        ]);
    }
    Ok(t)
}

/// `(R² − r²)/(2n)` sampled at `samples` radii of `[0, R]`.
pub fn torsion_ball_table(n: usize, radius: f64, samples: usize) -> Result<Table> {
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let mut t = Table::new(["r", "u"]);
    for i in 0..samples {
        let r = radius * i as f64 / (samples - 1) as f64;
        t.push_numbers(&[r, torsion_ball(n, radius, r)?]);
    }
    Ok(t)
}

/// Ball eigenvalues of both conventions for each dimension.
pub fn ball_lambda_table(n_values: &[usize], radius: f64) -> Table {
    let mut t = Table::new(["n", "R", "lambda_hinged", "lambda_clamped"]);
    for &n in n_values {
        t.push(vec![
            n.to_string(),
            num(radius),
            num(hinged_ball_lambda(n, radius)),
            num(clamped_ball_lambda(n, radius)),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(n: usize, r: f64) -> f64 {
        clamped_profile_w(&ClampedProfileParams::unit(n).unwrap(), r).unwrap()
    }

    #[test]
    fn torsion_values() {
        assert_eq!(torsion_ball(2, 1.0, 0.0).unwrap(), 0.25);
        assert_eq!(torsion_ball(5, 1.7, 1.7).unwrap(), 0.0);
        assert!((torsion_ball(3, 1.0, 0.0).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!(torsion_ball(2, 1.0, 1.5).is_err());
        assert_eq!(hinged_ball_lambda(2, 1.0), 4.0);
        assert_eq!(hinged_ball_lambda(3, 1.0), 6.0);
        assert_eq!(hinged_ball_lambda(2, 2.0), 1.0);
    }

    #[test]
    fn profile_centre_values() {
        // w_1(0) by hand: ln 2 / 4 in the plane; 2^{-2/3}/3 - 1/6 - 1/3 + 2^{1/3}/3 in space
        assert!((w(2, 0.0) - 0.173_286_795_139_986_3).abs() < 1e-15);
        let n3 = 2f64.powf(-2.0 / 3.0) / 3.0 - 1.0 / 6.0 - 1.0 / 3.0 + 2f64.powf(1.0 / 3.0) / 3.0;
        assert!((w(3, 0.0) - n3).abs() < 1e-15);
        assert!((w(3, 0.0) - 0.129_961).abs() < 1e-6);
        assert_eq!(w(1, 0.0), 0.25);
        assert!((w(1, 0.5) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn profile_continuity_and_clamping() {
        for n in 1..=8 {
            let params = ClampedProfileParams::unit(n).unwrap();
            let rho = params.break_radius();
            assert!((0.5..1.0).contains(&rho));
            let below = w(n, rho);
            let above = w(n, rho + 1e-13);
            assert!((below - above).abs() < 1e-12, "n={n}");
            assert!(w(n, 1.0).abs() < 1e-12, "n={n}");
            let slope = (w(n, 1.0) - w(n, 1.0 - 1e-6)) / 1e-6;
            assert!(slope.abs() < 1e-5, "n={n} slope {slope}");
        }
    }

    #[test]
    fn profile_is_radially_decreasing() {
        for n in [1, 2, 3, 7] {
            let mut prev = w(n, 0.0);
            for i in 1..=10_000 {
                let cur = w(n, i as f64 / 10_000.0);
                assert!(cur < prev + 1e-15 && cur >= -1e-15);
                prev = cur;
            }
        }
    }

    #[test]
    fn unit_radius_maximizes_centre_value() {
        for n in [2, 3, 4, 5] {
            let at = |r: f64| {
                let p = ClampedProfileParams::new(n, r).unwrap();
                clamped_profile_w(&p, 0.0).unwrap()
            };
            let top = at(1.0);
            for i in 1..1000 {
                assert!(at(i as f64 / 1000.0) < top, "n={n}");
            }
        }
    }

    #[test]
    fn ball_lambdas() {
        assert_eq!(clamped_ball_lambda(1, 1.0), 4.0);
        assert!((clamped_ball_lambda(2, 1.0) - 5.770_780_163_555_854).abs() < 1e-12);
        assert!((clamped_ball_lambda(3, 1.0) - 7.694_644_203_726_14).abs() < 1e-12);
        for n in 1..=60 {
            let inv = 1.0 / w(n, 0.0);
            assert!((clamped_ball_lambda(n, 1.0) - inv).abs() < 1e-10 * inv, "n={n}");
            assert!(clamped_ball_lambda(n, 1.0) >= hinged_ball_lambda(n, 1.0));
        }
        assert!((clamped_ball_lambda(2, 2.0) * 4.0 - clamped_ball_lambda(2, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn invalid_profile_arguments() {
        assert!(ClampedProfileParams::new(2, 1.5).is_err());
        assert!(ClampedProfileParams::new(0, 1.0).is_err());
        let p = ClampedProfileParams::new(2, 0.5).unwrap();
        assert!(clamped_profile_w(&p, 0.6).is_err());
        assert!((clamped_profile_w(&p, 0.0).unwrap() - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn tables() {
        let t = clamped_profile_table(2, 512).unwrap();
        assert_eq!(t.rows.len(), 512);
        let w = t.numbers("w").unwrap();
        assert!((w[0] - 2f64.ln() / 4.0).abs() < 1e-15);
        assert!(w[511].abs() < 1e-15);
        let b = ball_lambda_table(&[1, 2, 3], 1.0);
        assert_eq!(b.rows[0][3], "4");
    }
}
