use crate::error::{Error, Result};
use crate::geometry::RadialMesh;

/// Componentwise backward error every radial Poisson solve must meet.
pub const RADIAL_RESIDUAL_BOUND: f64 = 1e-12;

/// Values on the nodes `r_0, ..., r_{M-1}` of a radial mesh; the value at
/// `r_M = R` is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    mesh: RadialMesh,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(mesh: RadialMesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.cells() {
            return Err(Error::InvalidArgument(format!(
                "radial field has {} values for {} nodes",
                values.len(),
                mesh.cells()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("radial field contains non-finite values".into()));
        }
        Ok(RadialField { mesh, values })
    }

    pub fn from_fn(mesh: RadialMesh, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..mesh.cells()).map(|i| f(mesh.r(i))).collect();
        Self::new(mesh, values)
    }

    /// Control-volume averages of `f`, suited as a Poisson right-hand side.
    pub fn averaged(mesh: RadialMesh, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut values = mesh.cell_averages(f);
        values.pop();
        Self::new(mesh, values)
    }

    pub fn mesh(&self) -> &RadialMesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at node `i`, zero at `i = M`.
    pub fn at(&self, i: usize) -> f64 {
        self.values.get(i).copied().unwrap_or(0.0)
    }

    /// Piecewise-linear interpolation at radius `r`.
    pub fn eval(&self, r: f64) -> f64 {
        let h = self.mesh.spacing();
        let s = (r / h).clamp(0.0, self.mesh.cells() as f64);
        let i = (s.floor() as usize).min(self.mesh.cells() - 1);
        let t = s - i as f64;
        (1.0 - t) * self.at(i) + t * self.at(i + 1)
    }
}

/// Tridiagonal coefficients `(lower, diag, upper)` of the conservative radial
/// Laplacian `r^{1-n} (r^{n-1} u')'` on nodes `0..M`, with `u_M = 0`.
fn stencil(mesh: &RadialMesh) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let m = mesh.cells();
    let h = mesh.spacing();
    let n = mesh.n() as i32;
    let mut lo = vec![0.0; m];
    let mut di = vec![0.0; m];
    let mut up = vec![0.0; m];
    // centre: flux through r = h/2 over the volume of [0, h/2]
    di[0] = -2.0 * n as f64 / (h * h);
    up[0] = 2.0 * n as f64 / (h * h);
    for i in 1..m {
        let rp = (i as f64 + 0.5) * h;
        let rm = (i as f64 - 0.5) * h;
        let fp = rp.powi(n - 1);
        let fm = rm.powi(n - 1);
        let vol = (rp.powi(n) - rm.powi(n)) / n as f64;
        lo[i] = fm / (h * vol);
        up[i] = fp / (h * vol);
        di[i] = -(lo[i] + up[i]);
    }
    (lo, di, up)
}

fn apply_stencil(st: &(Vec<f64>, Vec<f64>, Vec<f64>), u: &[f64]) -> Vec<f64> {
    let (lo, di, up) = st;
    let m = u.len();
    (0..m)
        .map(|i| {
            let left = if i > 0 { lo[i] * u[i - 1] } else { 0.0 };
            let right = if i + 1 < m { up[i] * u[i + 1] } else { 0.0 };
            left + di[i] * u[i] + right
        })
        .collect()
}

/// Radial Laplacian of `u` in the ambient dimension of its mesh.
pub fn radial_laplacian(u: &RadialField) -> RadialField {
    let st = stencil(&u.mesh);
    RadialField {
        mesh: u.mesh,
        values: apply_stencil(&st, &u.values),
    }
}

/// Solves `-Δ w = rhs` on the ball with `w(R) = 0`.
pub fn radial_poisson_solve(rhs: &RadialField) -> Result<RadialField> {
    let st = stencil(&rhs.mesh);
    let (lo, di, up) = &st;
    let m = rhs.values.len();
    // Thomas algorithm on the negated system
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    let mut denom = -di[0];
    c[0] = -up[0] / denom;
    d[0] = rhs.values[0] / denom;
    for i in 1..m {
        denom = -di[i] + lo[i] * c[i - 1];
        c[i] = if i + 1 < m { -up[i] / denom } else { 0.0 };
        d[i] = (rhs.values[i] + lo[i] * d[i - 1]) / denom;
    }
    let mut w = vec![0.0; m];
    w[m - 1] = d[m - 1];
    for i in (0..m - 1).rev() {
        w[i] = d[i] - c[i] * w[i + 1];
    }
    // componentwise backward error, insensitive to the O(M²) conditioning
    let lw = apply_stencil(&st, &w);
    let at = |i: usize| if i < m { w[i].abs() } else { 0.0 };
    let mut berr = 0.0f64;
    for i in 0..m {
        let left = if i > 0 { lo[i].abs() * at(i - 1) } else { 0.0 };
        let scale = left + di[i].abs() * at(i) + up[i].abs() * at(i + 1) + rhs.values[i].abs();
        if scale > 0.0 {
            berr = berr.max((lw[i] + rhs.values[i]).abs() / scale);
        }
    }
    if berr > RADIAL_RESIDUAL_BOUND {
        return Err(Error::LinearSolve {
            residual: berr,
            bound: RADIAL_RESIDUAL_BOUND,
        });
    }
    RadialField::new(rhs.mesh, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratics_are_exact() {
        for n in [1, 2, 3, 7] {
            let mesh = RadialMesh::new(n, 1.0, 50).unwrap();
            let u = RadialField::from_fn(mesh, |r| 1.0 - r * r).unwrap();
            for v in radial_laplacian(&u).values() {
                assert!((v + 2.0 * n as f64).abs() < 1e-8, "n={n} {v}");
            }
        }
    }

    #[test]
    fn torsion_is_exact() {
        for n in [1, 2, 5, 50] {
            let mesh = RadialMesh::new(n, 1.3, 40).unwrap();
            let rhs = RadialField::from_fn(mesh, |_| 1.0).unwrap();
            let w = radial_poisson_solve(&rhs).unwrap();
            for i in 0..40 {
                let r = mesh.r(i);
                let exact = (1.69 - r * r) / (2.0 * n as f64);
                assert!((w.at(i) - exact).abs() < 1e-10, "n={n} i={i}");
            }
        }
    }

    #[test]
    fn second_order_for_smooth_data() {
        // -Δ w = f with w = cos(pi r / 2) in dimension 3
        let pi = std::f64::consts::PI;
        let f = |r: f64| {
            let k = pi / 2.0;
            if r == 0.0 {
                3.0 * k * k
            } else {
                k * k * (k * r).cos() + 2.0 * k * (k * r).sin() / r
            }
        };
        let err = |m: usize| {
            let mesh = RadialMesh::new(3, 1.0, m).unwrap();
            let w = radial_poisson_solve(&RadialField::averaged(mesh, f).unwrap()).unwrap();
            (0..m)
                .map(|i| (w.at(i) - (pi * mesh.r(i) / 2.0).cos()).abs())
                .fold(0.0f64, f64::max)
        };
        let ratio = err(64) / err(128);
        assert!(ratio > 3.5, "{ratio}");
    }

    #[test]
    fn interpolation() {
        let mesh = RadialMesh::new(2, 1.0, 4).unwrap();
        let u = RadialField::from_fn(mesh, |r| 1.0 - r).unwrap();
        assert!((u.eval(0.6) - 0.4).abs() < 1e-14);
        assert_eq!(u.eval(1.0), 0.0);
    }
}
