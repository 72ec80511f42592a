use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{GridDomain, MARGIN};
use crate::operators::{PoissonSolver, ScalarField};

/// The `count` lattice nodes nearest to the origin (ties broken by lattice
/// index) as a grid domain. 2D lattices are cell-centred like the disks of
/// `make_domain`; 1D lattices carry a node at the origin.
pub fn ball_grid(dim: usize, h: f64, count: usize) -> Result<GridDomain> {
    if count == 0 {
        return Err(Error::InvalidArgument("ball grid needs at least one node".into()));
    }
    match dim {
        1 => {
            let m = count.div_ceil(2) + MARGIN + 1;
            let nx = 2 * m + 1;
            let mut keys: Vec<(u64, usize)> = (0..nx)
                .map(|i| ((i as i64 - m as i64).unsigned_abs().pow(2), i))
                .collect();
            keys.sort_unstable();
            let mut mask = vec![false; nx];
            for &(_, l) in &keys[..count] {
                mask[l] = true;
            }
            GridDomain::from_mask(1, h, [-(m as f64) * h, 0.0], nx, 1, mask)
        }
        2 => {
            let r = (count as f64 / std::f64::consts::PI).sqrt() + 2.0;
            let m = r.ceil() as usize + MARGIN + 1;
            let nx = 2 * m;
            // squared distance in units of (h/2)^2, exact in integers
            let mut keys: Vec<(u64, usize)> = Vec::with_capacity(nx * nx);
            for j in 0..nx {
                let y = 2 * j as i64 - 2 * m as i64 + 1;
                for i in 0..nx {
                    let x = 2 * i as i64 - 2 * m as i64 + 1;
                    keys.push(((x * x + y * y) as u64, j * nx + i));
                }
            }
            keys.sort_unstable();
            let mut mask = vec![false; nx * nx];
            for &(_, l) in &keys[..count] {
                mask[l] = true;
            }
            let o = -(m as f64 - 0.5) * h;
            GridDomain::from_mask(2, h, [o, o], nx, nx, mask)
        }
        _ => Err(Error::InvalidArgument(format!("dimension {dim} unsupported"))),
    }
}

/// Decreasing rearrangement onto a ball grid of fixed node count.
#[derive(Debug, Clone)]
pub struct Symmetrizer {
    ball: Arc<GridDomain>,
    /// Interior indices of the ball ordered by distance from the centre.
    order: Vec<usize>,
}

impl Symmetrizer {
    pub fn new(dim: usize, h: f64, count: usize) -> Result<Self> {
        let ball = ball_grid(dim, h, count)?;
        let coords = ball.interior_coords();
        let mut order: Vec<usize> = (0..coords.len()).collect();
        // exact ordering: squared distance in units of the half spacing
        let key = |k: usize| -> i64 {
            let [x, y] = coords[k];
            let (a, b) = ((2.0 * x / h).round() as i64, (2.0 * y / h).round() as i64);
            a * a + b * b
        };
        order.sort_by_key(|&k| (key(k), ball.interior_nodes()[k]));
        Ok(Symmetrizer {
            ball: Arc::new(ball),
            order,
        })
    }

    /// Symmetrizer matching the node count and spacing of a domain.
    pub fn for_domain(d: &GridDomain) -> Result<Self> {
        Self::new(d.dim(), d.h(), d.num_interior())
    }

    pub fn ball(&self) -> &Arc<GridDomain> {
        &self.ball
    }

    /// Rearranges `values` (magnitudes unless `nonneg`) decreasingly by
    /// distance from the centre; equal values keep their index order.
    pub fn apply(&self, values: &[f64], nonneg: bool) -> Result<ScalarField> {
        if values.len() != self.order.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a ball of {} nodes",
                values.len(),
                self.order.len()
            )));
        }
        if nonneg && values.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidArgument("field declared nonnegative has negative values".into()));
        }
        let mut sorted: Vec<f64> = values.iter().map(|v| v.abs()).collect();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut out = vec![0.0; values.len()];
        for (&k, v) in self.order.iter().zip(sorted) {
            out[k] = v;
        }
        ScalarField::new(self.ball.clone(), out)
    }
}

/// Schwarz symmetrization of `u` onto the ball grid with the same node count
/// and spacing.
pub fn schwarz_symmetrize(u: &ScalarField, nonneg: bool) -> Result<ScalarField> {
    Symmetrizer::for_domain(u.domain())?.apply(u.values(), nonneg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TalentiReport {
    /// `max (u* − v)` over the ball nodes.
    pub max_violation: f64,
    pub u_max: f64,
    pub v_max: f64,
}

/// Compares the rearranged solution of `−Δu = f` on the domain of `f` with
/// the solution of `−Δv = f*` on the ball grid.
pub fn talenti_compare(f: &ScalarField) -> Result<TalentiReport> {
    if f.values().iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidArgument("Talenti comparison needs a nonnegative load".into()));
    }
    let u = PoissonSolver::new(f.domain())?.solve_field(f)?;
    let sym = Symmetrizer::for_domain(f.domain())?;
    let f_star = sym.apply(f.values(), true)?;
    let u_star = sym.apply(u.values(), false)?;
    let v = PoissonSolver::new(sym.ball())?.solve_field(&f_star)?;
    let max_violation = u_star
        .values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| a - b)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(TalentiReport {
        max_violation,
        u_max: u.max_abs(),
        v_max: v.max_abs(),
    })
}
