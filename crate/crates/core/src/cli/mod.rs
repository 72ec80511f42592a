//! Command-line front end: configuration, dispatch and artifact writing.

mod config;
mod plot;

pub use config::{
    parse_config, parse_config_for, serialize, Command, OracleTask, PlotKind, PlotTask, RunConfig, Task,
    DEFAULT_MAX_ITER, DEFAULT_TOL,
};
pub use plot::emit_plot;

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use crate::eigensolver::{
    continuation, default_eps_f, extract_duals, structure_report, EigenPair, SolveOptions,
};
use crate::error::{Error, Result};
use crate::geometry::{make_domain, GridDomain};
use crate::harness::{convergence_study, faber_krahn_experiment, remark9_table, trace_table};
use crate::io::{num, write_text, FlatRecord, LatticeDump};
use crate::operators::laplacian;
use crate::oracles::{ball_lambda_table, clamped_profile_table, torsion_ball_table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } => EXIT_CONFIG,
        Error::Io(_) | Error::Format { .. } => EXIT_IO,
        _ => EXIT_SOLVER,
    }
}

/// Files written by a run, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunSummary {
    pub files: Vec<String>,
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl Writer<'_> {
    fn put(&mut self, name: &str, text: &str) -> Result<()> {
        write_text(&self.dir.join(name), text)?;
        self.files.push(name.to_owned());
        Ok(())
    }
}

fn domain_record(rec: &mut FlatRecord, d: &GridDomain) {
    rec.set("dim", d.dim())
        .set("h", num(d.h()))
        .set("interior_nodes", d.num_interior())
        .set("boundary_nodes", d.num_boundary());
}

fn pair_outputs(w: &mut Writer, pair: &EigenPair) -> Result<()> {
    let mut rec = FlatRecord::new();
    rec.set("bc", pair.bc.name())
        .set("p", num(pair.p))
        .set("lambda", num(pair.lambda))
        .set("el_residual", num(pair.el_residual))
        .set("iterations", pair.iterations);
    domain_record(&mut rec, pair.domain());
    w.put("pair.txt", &rec.to_text())?;
    w.put("mask.txt", &pair.domain().mask_rle())?;
    w.put("u.txt", &LatticeDump::from_field(&pair.u).to_text())?;
    w.put(
        "laplacian.txt",
        &LatticeDump::from_field(&laplacian(&pair.u, pair.bc)).to_text(),
    )?;
    let duals = extract_duals(pair)?;
    let eps = default_eps_f(&duals);
    let rep = structure_report(pair, &duals, eps);
    let mut s = FlatRecord::new();
    s.set("eps_f", num(rep.eps_f))
        .set("sign_set_fraction", num(rep.sign_set_fraction))
        .set("inclusion_violation", num(rep.inclusion_violation))
        .set("laplacian_spread_positive", num(rep.laplacian_spread[0]))
        .set("laplacian_spread_negative", num(rep.laplacian_spread[1]));
    if let Some(c) = rep.hinged_constancy {
        s.set("hinged_constancy", num(c));
    }
    s.set("f_dualnorm", num(duals.f_dualnorm))
        .set("g_dualnorm", num(duals.g_dualnorm))
        .set("inverse_lambda", num(1.0 / pair.lambda))
        .set("poisson_residual", num(duals.poisson_residual));
    w.put("structure.txt", &s.to_text())
}

/// Executes a configuration and writes its artifacts under `out`: the
/// canonical config, a manifest, tables and field dumps. Wall-clock time goes
/// to `timing.txt` so that every other file is reproducible byte for byte.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<RunSummary> {
    let start = Instant::now();
    let mut w = Writer {
        dir: out,
        files: Vec::new(),
    };
    let opts = SolveOptions {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
    };
    let mut manifest = FlatRecord::new();
    manifest
        .set("program", env!("CARGO_PKG_NAME"))
        .set("version", env!("CARGO_PKG_VERSION"))
        .set("command", cfg.command().name())
        .set("config", "config.txt")
        .set("bc", cfg.bc.name())
        .set("tol", num(cfg.tol))
        .set("max_iter", cfg.max_iter)
        .set("seed", cfg.seed);
    w.put("config.txt", &serialize(cfg))?;
    let domain = |spec| -> Result<Arc<GridDomain>> { Ok(Arc::new(make_domain(spec)?)) };
    match &cfg.task {
        Task::Solve { domain: spec, p } => {
            let d = domain(spec)?;
            let trace = continuation(&d, cfg.bc, &[*p], &opts)?;
            manifest.set("p", num(*p));
            pair_outputs(&mut w, trace.terminal_pair())?;
        }
        Task::Continuation { domain: spec, schedule } => {
            let d = domain(spec)?;
            let trace = continuation(&d, cfg.bc, schedule, &opts)?;
            manifest.set("p_schedule", join(schedule));
            w.put("trace.csv", &trace_table(&trace).to_csv())?;
            let mut fit = FlatRecord::new();
            fit.set("lambda_inf_estimate", num(trace.lambda_inf_estimate))
                .set("fit_a", num(trace.fit_coeffs.0))
                .set("fit_b", num(trace.fit_coeffs.1))
                .set("fit_window", trace.fit_window);
            w.put("fit.txt", &fit.to_text())?;
            pair_outputs(&mut w, trace.terminal_pair())?;
        }
        Task::FaberKrahn { domains, schedule } => {
            let r = faber_krahn_experiment(domains, cfg.bc, schedule, cfg.tol)?;
            manifest
                .set("p_schedule", join(schedule))
                .set("resolutions", join(&r.resolutions));
            w.put("faber_krahn.csv", &r.table().to_csv())?;
            for (row, trace) in r.rows.iter().zip(&r.traces) {
                if let Some(t) = trace {
                    w.put(&row.trace_ref, &trace_table(t).to_csv())?;
                }
            }
        }
        Task::Convergence { domain: spec, p, resolutions } => {
            let study = convergence_study(spec, cfg.bc, *p, resolutions, cfg.tol)?;
            manifest.set("p", num(*p));
            w.put("convergence.csv", &study.table().to_csv())?;
            w.put("convergence.txt", &study.record().to_text())?;
        }
        Task::Oracle(o) => {
            let (name, table) = match o {
                OracleTask::ClampedProfile { n, samples } => ("clamped_profile.csv", clamped_profile_table(*n, *samples)?),
                OracleTask::Torsion { n, radius, samples } => ("torsion.csv", torsion_ball_table(*n, *radius, *samples)?),
                OracleTask::BallLambda { n_values, radius } => ("ball_lambda.csv", ball_lambda_table(n_values, *radius)),
                OracleTask::Remark9 { n_values } => ("remark9.csv", remark9_table(n_values)?),
            };
            if matches!(o, OracleTask::BallLambda { .. } | OracleTask::Remark9 { .. }) {
                manifest.set("clamped_n2", "4/ln2, the reciprocal of the profile centre value ln2/4");
            }
            w.put(name, &table.to_csv())?;
        }
        Task::Plot(p) => {
            let input = std::fs::read_to_string(&p.input)
                .map_err(|e| Error::format("plot input", format!("{}: {e}", p.input.display())))?;
            let cols = p.columns.as_ref().map(|(x, y)| (x.as_str(), y.as_str()));
            let svg = emit_plot(p.kind, &input, cols)?;
            manifest.set("input", p.input.display());
            w.put(&p.output, &svg)?;
        }
    }
    w.put("manifest.txt", &manifest.to_text())?;
    write_text(
        &out.join("timing.txt"),
        &format!("wall_seconds = {}\n", start.elapsed().as_secs_f64()),
    )?;
    Ok(RunSummary { files: w.files })
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(",")
}

/// Output directory: the command-line flag, else the config's `out`, else
/// `out` in the working directory.
pub fn output_dir(flag: Option<PathBuf>, cfg: &RunConfig) -> PathBuf {
    flag.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"))
}
