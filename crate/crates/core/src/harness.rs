//! Multi-domain sweeps: Faber-Krahn ratios against the equal-measure ball,
//! grid-convergence studies and the ball eigenvalue table across dimensions.

use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::eigensolver::{continuation, ContinuationTrace, SolveOptions};
use crate::error::{Error, Result};
use crate::geometry::{equal_area_radius, make_domain, measure, Resolution, ShapeSpec};
use crate::io::{num, FlatRecord, Table};
use crate::oracles::{clamped_ball_lambda, hinged_ball_lambda};
use crate::operators::BcKind;

/// Doubling schedule from 2 to 128.
pub const DEFAULT_SCHEDULE: [f64; 7] = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0];

/// Declared relative tolerance of a ball control row.
pub fn control_tolerance(bc: BcKind) -> f64 {
    match bc {
        BcKind::Hinged => 0.02,
        BcKind::Clamped => 0.06,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Ok,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FkRow {
    pub domain_id: String,
    pub bc: BcKind,
    pub measure: f64,
    pub equal_area_radius: f64,
    pub lambda_inf_estimate: f64,
    pub lambda_ball_oracle: f64,
    pub ratio: f64,
    /// File name of the per-domain trace table.
    pub trace_ref: String,
    /// Shape outside the smooth class covered by the inequality.
    pub nonsmooth: bool,
    pub status: RowStatus,
    /// Set on ball rows, which serve as controls.
    pub control_tolerance: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub rows: Vec<FkRow>,
    pub schedule: Vec<f64>,
    /// Lattice spacing of each domain, in input order.
    pub resolutions: Vec<f64>,
    pub tol: f64,
    pub wall_time: Duration,
    /// Continuation traces in input order; `None` for failed domains.
    pub traces: Vec<Option<ContinuationTrace>>,
}

impl ExperimentResult {
    pub fn table(&self) -> Table {
        let mut t = Table::new([
            "domain_id",
            "bc",
            "measure",
            "equal_area_radius",
            "lambda_inf_estimate",
            "lambda_ball_oracle",
            "ratio",
            "trace_ref",
            "nonsmooth",
            "control_tolerance",
            "status",
        ]);
        for r in &self.rows {
            t.push(vec![
                r.domain_id.clone(),
                r.bc.name().to_owned(),
                num(r.measure),
                num(r.equal_area_radius),
                num(r.lambda_inf_estimate),
                num(r.lambda_ball_oracle),
                num(r.ratio),
                r.trace_ref.clone(),
                r.nonsmooth.to_string(),
                r.control_tolerance.map(num).unwrap_or_default(),
                match &r.status {
                    RowStatus::Ok => "ok".to_owned(),
                    RowStatus::Failed(m) => format!("failed: {}", m.replace(',', ";")),
                },
            ]);
        }
        t
    }

    /// The first ball row that solved.
    pub fn control(&self) -> Option<&FkRow> {
        self.rows
            .iter()
            .find(|r| r.control_tolerance.is_some() && r.status == RowStatus::Ok)
    }
}

/// Equal-measure ball eigenvalue of the given dimension.
pub fn ball_oracle(bc: BcKind, dim: usize, radius: f64) -> f64 {
    match bc {
        BcKind::Hinged => hinged_ball_lambda(dim, radius),
        BcKind::Clamped => clamped_ball_lambda(dim, radius),
    }
}

/// Trace table of a continuation run: one row per exponent.
pub fn trace_table(trace: &ContinuationTrace) -> Table {
    let mut t = Table::new(["p", "lambda", "el_residual", "iterations"]);
    for e in &trace.entries {
        t.push(vec![num(e.p), num(e.lambda), num(e.el_residual), e.iterations.to_string()]);
    }
    t
}

/// Runs continuation on every domain and compares with the ball of equal
/// measure. Domains that fail are kept as marked rows. The specs must share a
/// dimension and include a ball (disk or interval) as control.
pub fn faber_krahn_experiment(
    specs: &[ShapeSpec],
    bc: BcKind,
    schedule: &[f64],
    tol: f64,
) -> Result<ExperimentResult> {
    let start = Instant::now();
    let opts = SolveOptions::with_tol(tol);
    opts.validate()?;
    if specs.is_empty() {
        return Ok(ExperimentResult {
            rows: Vec::new(),
            schedule: schedule.to_vec(),
            resolutions: Vec::new(),
            tol,
            wall_time: start.elapsed(),
            traces: Vec::new(),
        });
    }
    let dim = specs[0].shape.dim();
    if specs.iter().any(|s| s.shape.dim() != dim) {
        return Err(Error::InvalidArgument("sweep mixes 1D and 2D shapes".into()));
    }
    if !specs.iter().any(|s| s.shape.is_ball()) {
        return Err(Error::InvalidArgument("sweep needs a ball as control".into()));
    }
    let mut rows = Vec::with_capacity(specs.len());
    let mut traces = Vec::with_capacity(specs.len());
    let mut resolutions = Vec::with_capacity(specs.len());
    for (i, spec) in specs.iter().enumerate() {
        let domain_id = format!("{i}-{}", spec.shape.kind().name());
        let trace_ref = format!("trace-{domain_id}.csv");
        let mut row = FkRow {
            domain_id,
            bc,
            measure: f64::NAN,
            equal_area_radius: f64::NAN,
            lambda_inf_estimate: f64::NAN,
            lambda_ball_oracle: f64::NAN,
            ratio: f64::NAN,
            trace_ref,
            nonsmooth: spec.shape.flagged_nonsmooth(),
            status: RowStatus::Ok,
            control_tolerance: spec.shape.is_ball().then(|| control_tolerance(bc)),
        };
        let run = make_domain(spec).and_then(|d| {
            let d = Arc::new(d);
            resolutions.push(d.h());
            row.measure = measure(&d);
            row.equal_area_radius = equal_area_radius(&d);
            row.lambda_ball_oracle = ball_oracle(bc, dim, row.equal_area_radius);
            continuation(&d, bc, schedule, &opts)
        });
        match run {
            Ok(trace) => {
                row.lambda_inf_estimate = trace.lambda_inf_estimate;
                row.ratio = row.lambda_inf_estimate / row.lambda_ball_oracle;
                traces.push(Some(trace));
            }
            Err(e) => {
                if resolutions.len() == i {
                    resolutions.push(f64::NAN);
                }
                row.status = RowStatus::Failed(e.to_string());
                traces.push(None);
            }
        }
        rows.push(row);
    }
    Ok(ExperimentResult {
        rows,
        schedule: schedule.to_vec(),
        resolutions,
        tol,
        wall_time: start.elapsed(),
        traces,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub bc: BcKind,
    pub p: f64,
    /// `(h, interior nodes, Λ_p)` from coarse to fine.
    pub rows: Vec<(f64, usize, f64)>,
    pub extrapolated: f64,
    pub observed_order: f64,
}

impl ConvergenceStudy {
    pub fn table(&self) -> Table {
        let mut t = Table::new(["h", "nodes", "lambda"]);
        for &(h, n, l) in &self.rows {
            t.push(vec![num(h), n.to_string(), num(l)]);
        }
        t
    }

    pub fn record(&self) -> FlatRecord {
        let mut r = FlatRecord::new();
        r.set("bc", self.bc.name())
            .set("p", num(self.p))
            .set("extrapolated", num(self.extrapolated))
            .set("observed_order", num(self.observed_order));
        r
    }
}

/// Observed order `q` and extrapolated limit from the three finest levels,
/// solving `(Λ₁−Λ₂)/(Λ₂−Λ₃) = (h₁^q−h₂^q)/(h₂^q−h₃^q)` by bisection. When the
/// differences change sign there is no asymptotic regime: the order is NaN
/// and the finest value is returned.
pub fn richardson(levels: &[(f64, f64)]) -> Result<(f64, f64)> {
    let [(h1, l1), (h2, l2), (h3, l3)] = match levels {
        [.., a, b, c] => [*a, *b, *c],
        _ => return Err(Error::InvalidArgument("Richardson needs three levels".into())),
    };
    if !(h1 > h2 && h2 > h3 && h3 > 0.0) {
        return Err(Error::InvalidArgument("spacings must decrease".into()));
    }
    let ratio = (l1 - l2) / (l2 - l3);
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Ok((l3, f64::NAN));
    }
    let model = |q: f64| (h1.powf(q) - h2.powf(q)) / (h2.powf(q) - h3.powf(q)) - ratio;
    let (mut lo, mut hi) = (1e-3, 12.0);
    if model(lo) * model(hi) > 0.0 {
        return Ok((l3, f64::NAN));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if model(lo) * model(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let q = 0.5 * (lo + hi);
    let extrapolated = l3 + (l3 - l2) * h3.powf(q) / (h2.powf(q) - h3.powf(q));
    Ok((extrapolated, q))
}

/// `Λ_p` at each resolution (coarse to fine), with Richardson extrapolation.
pub fn convergence_study(
    spec: &ShapeSpec,
    bc: BcKind,
    p: f64,
    resolutions: &[Resolution],
    tol: f64,
) -> Result<ConvergenceStudy> {
    if resolutions.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "convergence study needs at least 3 resolutions, got {}",
            resolutions.len()
        )));
    }
    let opts = SolveOptions::with_tol(tol);
    let mut rows = Vec::with_capacity(resolutions.len());
    for &res in resolutions {
        let d = Arc::new(make_domain(&spec.with_resolution(res))?);
        let trace = continuation(&d, bc, &[p], &opts)?;
        rows.push((d.h(), d.num_interior(), trace.terminal_pair().lambda));
    }
    rows.sort_by(|a, b| b.0.total_cmp(&a.0));
    let levels: Vec<(f64, f64)> = rows.iter().map(|&(h, _, l)| (h, l)).collect();
    let (extrapolated, observed_order) = richardson(&levels)?;
    Ok(ConvergenceStudy {
        bc,
        p,
        rows,
        extrapolated,
        observed_order,
    })
}

/// Clamped versus hinged ball eigenvalues of the unit ball by dimension.
pub fn remark9_table(n_values: &[usize]) -> Result<Table> {
    let mut t = Table::new(["n", "lambda_clamped", "lambda_hinged", "ratio"]);
    for &n in n_values {
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        let (c, h) = (clamped_ball_lambda(n, 1.0), hinged_ball_lambda(n, 1.0));
        t.push(vec![n.to_string(), num(c), num(h), num(c / h)]);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Shape, ShapeKind};

    #[test]
    fn richardson_recovers_model() {
        let f = |h: f64| 3.0 + 0.7 * h * h;
        let (x, q) = richardson(&[(0.4, f(0.4)), (0.2, f(0.2)), (0.1, f(0.1))]).unwrap();
        assert!((x - 3.0).abs() < 1e-10 && (q - 2.0).abs() < 1e-8);
        let g = |h: f64| -1.0 - 2.0 * h.powf(1.3);
        let (x, q) = richardson(&[(0.3, g(0.3)), (0.2, g(0.2)), (0.05, g(0.05))]).unwrap();
        assert!((x + 1.0).abs() < 1e-9 && (q - 1.3).abs() < 1e-8);
        let (x, q) = richardson(&[(0.4, 1.0), (0.2, 2.0), (0.1, 1.5)]).unwrap();
        assert_eq!(x, 1.5);
        assert!(q.is_nan());
        assert!(richardson(&[(0.2, 1.0), (0.1, 1.0)]).is_err());
    }

    #[test]
    fn remark9_values() {
        let t = remark9_table(&[3, 10, 50]).unwrap();
        let r = t.numbers("ratio").unwrap();
        assert!((r[0] - 1.282_440_7).abs() < 1e-6);
        assert!(r[1] > 1.0 && r[1] < r[0]);
        assert!(r[2] < 1.1);
        assert_eq!(t.numbers("lambda_hinged").unwrap(), vec![6.0, 20.0, 100.0]);
        assert!(remark9_table(&[0]).is_err());
    }

    #[test]
    fn empty_and_invalid_sweeps() {
        let r = faber_krahn_experiment(&[], BcKind::Hinged, &DEFAULT_SCHEDULE, 1e-8).unwrap();
        assert!(r.rows.is_empty() && r.traces.is_empty());
        let sq = ShapeSpec::new(Shape::unit_area(ShapeKind::Rectangle, 1.0), Resolution::Spacing(0.1));
        assert!(faber_krahn_experiment(&[sq], BcKind::Hinged, &DEFAULT_SCHEDULE, 1e-8).is_err());
        let iv = ShapeSpec::new(Shape::Interval { half_length: 1.0 }, Resolution::Cells(20));
        let disk = ShapeSpec::new(Shape::Disk { radius: 0.5 }, Resolution::Spacing(0.1));
        assert!(faber_krahn_experiment(&[iv, disk], BcKind::Hinged, &DEFAULT_SCHEDULE, 1e-8).is_err());
    }

    #[test]
    fn coarse_sweep_marks_failures() {
        let disk = ShapeSpec::new(Shape::Disk { radius: 0.5642 }, Resolution::Spacing(0.05));
        let tiny = ShapeSpec::new(Shape::Disk { radius: 0.01 }, Resolution::Spacing(0.05));
        let r = faber_krahn_experiment(&[disk, tiny], BcKind::Hinged, &[2.0, 4.0, 8.0], 1e-8).unwrap();
        assert_eq!(r.rows[0].status, RowStatus::Ok);
        assert!(matches!(r.rows[1].status, RowStatus::Failed(_)));
        assert!(r.traces[1].is_none());
        assert_eq!(r.table().rows.len(), 2);
        assert_eq!(r.control().unwrap().domain_id, "0-disk");
    }
}
