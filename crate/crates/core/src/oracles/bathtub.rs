use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BathtubResult {
    /// Maximizer, `b` on the top `count` nodes of `f` and `a` elsewhere.
    pub g: Vec<f64>,
    pub average: f64,
    /// Value of `f` at the last node set to `b` (`+∞` when none is).
    pub threshold: f64,
    /// `mean(f g)`.
    pub objective: f64,
    pub count: usize,
}

/// Maximizes `mean(f g)` over `a ≤ g ≤ b` with `mean(g)` as close to `ell`
/// as the lattice allows, by filling the largest values of `f` first. Ties
/// in `f` go to the lower index.
pub fn bathtub_maximize(f: &[f64], a: f64, b: f64, ell: f64) -> Result<BathtubResult> {
    if f.is_empty() {
        return Err(Error::InvalidArgument("bathtub needs at least one node".into()));
    }
    if a.is_nan() || b.is_nan() || a > b {
        return Err(Error::InvalidArgument(format!("bounds a = {a} > b = {b}")));
    }
    if !(a <= ell && ell <= b) {
        return Err(Error::InvalidArgument(format!("average {ell} outside [{a}, {b}]")));
    }
    let n = f.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| f[j].total_cmp(&f[i]).then(i.cmp(&j)));
    let avg = |k: usize| (k as f64 * b + (n - k) as f64 * a) / n as f64;
    let count = (0..=n)
        .min_by(|&k, &m| (avg(k) - ell).abs().total_cmp(&(avg(m) - ell).abs()))
        .unwrap_or(0);
    let mut g = vec![a; n];
    for &i in &order[..count] {
        g[i] = b;
    }
    let objective = f.iter().zip(&g).map(|(x, y)| x * y).sum::<f64>() / n as f64;
    let threshold = if count == 0 { f64::INFINITY } else { f[order[count - 1]] };
    Ok(BathtubResult {
        g,
        average: avg(count),
        threshold,
        objective,
        count,
    })
}

/// The maximizer alone.
pub fn bathtub_values(f: &[f64], a: f64, b: f64, ell: f64) -> Result<Vec<f64>> {
    bathtub_maximize(f, a, b, ell).map(|r| r.g)
}
