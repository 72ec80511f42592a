//! Flat `key = value` run configuration with `[section]` headers.
//!
//! ```text
//! command = continuation
//!
//! [solver]
//! bc = hinged
//! p_schedule = 2,4,8,16,32,64,128
//!
//! [domain]
//! shape = disk
//! radius = 1
//! h = 0.01
//! ```
//!
//! Each `[domain]` section adds one domain. Shapes take their explicit
//! parameters, or `unit_area = true` with an optional `aspect`.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::eigensolver::{P_MAX, P_MIN};
use crate::geometry::{Resolution, Shape, ShapeKind, ShapeSpec};
use crate::harness::DEFAULT_SCHEDULE;
use crate::io::num;
use crate::operators::BcKind;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Continuation,
    FaberKrahn,
    Oracle,
    Convergence,
    Plot,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Solve,
        Command::Continuation,
        Command::FaberKrahn,
        Command::Oracle,
        Command::Convergence,
        Command::Plot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Continuation => "continuation",
            Command::FaberKrahn => "faber-krahn",
            Command::Oracle => "oracle",
            Command::Convergence => "convergence",
            Command::Plot => "plot",
        }
    }

    pub fn from_name(s: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleTask {
    ClampedProfile { n: usize, samples: usize },
    Torsion { n: usize, radius: f64, samples: usize },
    BallLambda { n_values: Vec<usize>, radius: f64 },
    Remark9 { n_values: Vec<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Heatmap,
    Radial,
    Trace,
}

impl PlotKind {
    pub fn name(self) -> &'static str {
        match self {
            PlotKind::Heatmap => "heatmap",
            PlotKind::Radial => "radial",
            PlotKind::Trace => "trace",
        }
    }

    pub fn from_name(s: &str) -> Option<PlotKind> {
        [PlotKind::Heatmap, PlotKind::Radial, PlotKind::Trace]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotTask {
    pub kind: PlotKind,
    pub input: PathBuf,
    /// File name inside the output directory.
    pub output: String,
    /// Columns of a radial plot; the first two when unset.
    pub columns: Option<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Solve { domain: ShapeSpec, p: f64 },
    Continuation { domain: ShapeSpec, schedule: Vec<f64> },
    FaberKrahn { domains: Vec<ShapeSpec>, schedule: Vec<f64> },
    Oracle(OracleTask),
    Convergence { domain: ShapeSpec, p: f64, resolutions: Vec<Resolution> },
    Plot(PlotTask),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub bc: BcKind,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn command(&self) -> Command {
        match self.task {
            Task::Solve { .. } => Command::Solve,
            Task::Continuation { .. } => Command::Continuation,
            Task::FaberKrahn { .. } => Command::FaberKrahn,
            Task::Oracle(_) => Command::Oracle,
            Task::Convergence { .. } => Command::Convergence,
            Task::Plot(_) => Command::Plot,
        }
    }
}

struct Entry {
    line: usize,
    key: String,
    value: String,
    used: bool,
}

struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        let e = self.entries.iter_mut().find(|e| e.key == key)?;
        e.used = true;
        Some((e.line, e.value.clone()))
    }

    fn has(&self, key: &str) -> bool {
        self.entries.iter().any(|e| e.key == key)
    }

    fn missing(&self, key: &str) -> Error {
        let what = if self.name.is_empty() {
            "top level".to_owned()
        } else {
            format!("[{}]", self.name)
        };
        Error::config(self.line, format!("missing required key {key} in {what}"))
    }

    fn parsed<T>(&mut self, key: &str, kind: &str, f: impl Fn(&str) -> Option<T>) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => f(&v)
                .map(Some)
                .ok_or_else(|| Error::config(line, format!("{key} must be {kind}, got {v:?}"))),
        }
    }

    fn real(&mut self, key: &str) -> Result<Option<(usize, f64)>> {
        let line = self.line_of(key);
        Ok(self
            .parsed(key, "a finite number", |v| v.parse::<f64>().ok().filter(|x| x.is_finite()))?
            .map(|x| (line, x)))
    }

    fn positive(&mut self, key: &str) -> Result<Option<f64>> {
        match self.real(key)? {
            Some((line, x)) if x <= 0.0 => Err(Error::config(line, format!("{key} must be positive, got {x}"))),
            r => Ok(r.map(|(_, x)| x)),
        }
    }

    fn integer(&mut self, key: &str) -> Result<Option<usize>> {
        self.parsed(key, "a nonnegative integer", |v| v.parse().ok())
    }

    fn list<T: std::str::FromStr>(&mut self, key: &str, kind: &str) -> Result<Option<Vec<T>>> {
        self.parsed(key, kind, |v| {
            v.split(',')
                .map(|t| t.trim().parse::<T>().ok())
                .collect::<Option<Vec<T>>>()
                .filter(|l| !l.is_empty())
        })
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries
            .iter()
            .find(|e| e.key == key)
            .map_or(self.line, |e| e.line)
    }

    fn reject_unused(&self) -> Result<()> {
        match self.entries.iter().find(|e| !e.used) {
            Some(e) => Err(Error::config(e.line, format!("unknown key {}", e.key))),
            None => Ok(()),
        }
    }
}

const SECTIONS: [&str; 6] = ["", "solver", "domain", "convergence", "oracle", "plot"];

fn split_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections = vec![Section {
        name: String::new(),
        line: 1,
        entries: Vec::new(),
    }];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if let Some(name) = s.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::config(line, "unterminated section header"))?
                .trim();
            if !SECTIONS[1..].contains(&name) {
                return Err(Error::config(line, format!("unknown section [{name}]")));
            }
            if name != "domain" && sections.iter().any(|s| s.name == name) {
                return Err(Error::config(line, format!("section [{name}] repeated")));
            }
            sections.push(Section {
                name: name.to_owned(),
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| Error::config(line, "expected key = value"))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::config(line, "empty key"));
        }
        let cur = sections.last_mut().expect("top level always present");
        if cur.has(k) {
            return Err(Error::config(line, format!("duplicate key {k}")));
        }
        cur.entries.push(Entry {
            line,
            key: k.to_owned(),
            value: v.to_owned(),
            used: false,
        });
    }
    Ok(sections)
}

fn parse_domain(sec: &mut Section) -> Result<ShapeSpec> {
    let (line, name) = sec.take("shape").ok_or_else(|| sec.missing("shape"))?;
    let kind = ShapeKind::from_name(&name)
        .ok_or_else(|| Error::config(line, format!("unknown shape {name:?}")))?;
    let unit = sec
        .parsed("unit_area", "true or false", |v| v.parse::<bool>().ok())?
        .unwrap_or(false);
    let shape = if unit {
        let aspect = sec.positive("aspect")?.unwrap_or(1.0);
        if aspect < 1.0 {
            return Err(Error::config(sec.line_of("aspect"), "aspect must be at least 1"));
        }
        Shape::unit_area(kind, aspect)
    } else {
        let mut need = |key: &str| -> Result<f64> { sec.positive(key)?.ok_or_else(|| sec.missing(key)) };
        match kind {
            ShapeKind::Interval => Shape::Interval { half_length: need("half_length")? },
            ShapeKind::Disk => Shape::Disk { radius: need("radius")? },
            ShapeKind::Rectangle => Shape::Rectangle {
                width: need("width")?,
                height: need("height")?,
            },
            ShapeKind::Ellipse => Shape::Ellipse {
                semi_x: need("semi_x")?,
                semi_y: need("semi_y")?,
            },
            ShapeKind::Stadium => Shape::Stadium {
                length: need("length")?,
                radius: need("radius")?,
            },
            ShapeKind::LShape => Shape::LShape { arm: need("arm")? },
        }
    };
    let h = sec.positive("h")?;
    let cells = sec.integer("cells")?;
    let resolution = match (h, cells) {
        (Some(h), None) => Resolution::Spacing(h),
        (None, Some(m)) if m >= 2 && shape.dim() == 1 => Resolution::Cells(m),
        (None, Some(_)) => {
            return Err(Error::config(
                sec.line_of("cells"),
                "cells takes an integer ≥ 2 and applies to intervals only",
            ))
        }
        (Some(_), Some(_)) => return Err(Error::config(sec.line_of("cells"), "give either h or cells, not both")),
        (None, None) => return Err(sec.missing("h")),
    };
    Ok(ShapeSpec::new(shape, resolution))
}

fn check_p(line: usize, p: f64) -> Result<f64> {
    if (P_MIN..=P_MAX).contains(&p) {
        Ok(p)
    } else {
        Err(Error::config(line, format!("p must lie in [{P_MIN}, {P_MAX}], got {p}")))
    }
}

/// Parses and validates a configuration. A `command` key is required unless
/// `command` is given, in which case the two must agree.
pub fn parse_config_for(text: &str, command: Option<Command>) -> Result<RunConfig> {
    let mut sections = split_sections(text)?;
    let mut top = sections.remove(0);
    let cmd = match (top.take("command"), command) {
        (Some((line, v)), given) => {
            let c = Command::from_name(&v).ok_or_else(|| Error::config(line, format!("unknown command {v:?}")))?;
            if let Some(g) = given.filter(|g| *g != c) {
                return Err(Error::config(
                    line,
                    format!("config command {} differs from {}", c.name(), g.name()),
                ));
            }
            c
        }
        (None, Some(g)) => g,
        (None, None) => return Err(top.missing("command")),
    };
    let seed = top
        .parsed("seed", "a nonnegative integer", |v| v.parse::<u64>().ok())?
        .unwrap_or(0);
    let out = top.take("out").map(|(_, v)| PathBuf::from(v));
    top.reject_unused()?;

    let empty = |name: &str| Section {
        name: name.to_owned(),
        line: 1,
        entries: Vec::new(),
    };
    let mut take_section = |name: &str| -> Option<Section> {
        sections
            .iter()
            .position(|s| s.name == name)
            .map(|i| sections.remove(i))
    };
    let mut solver = take_section("solver").unwrap_or_else(|| empty("solver"));
    let mut domains = Vec::new();
    while let Some(s) = take_section("domain") {
        domains.push(s);
    }
    let conv = take_section("convergence");
    let oracle = take_section("oracle");
    let plot = take_section("plot");
    let unexpected = |s: &Option<Section>| -> Result<()> {
        match s {
            Some(s) => Err(Error::config(s.line, format!("section [{}] does not apply to {}", s.name, cmd.name()))),
            None => Ok(()),
        }
    };

    let bc = match solver.take("bc") {
        Some((line, v)) => BcKind::from_name(&v).ok_or_else(|| Error::config(line, format!("unknown bc {v:?}")))?,
        None => BcKind::Hinged,
    };
    let tol = solver.positive("tol")?.unwrap_or(DEFAULT_TOL);
    let max_iter = match solver.integer("max_iter")? {
        Some(0) => return Err(Error::config(solver.line_of("max_iter"), "max_iter must be positive")),
        Some(m) => m,
        None => DEFAULT_MAX_ITER,
    };
    let p_line = solver.line_of("p");
    let p = solver.real("p")?.map(|(_, p)| p);
    let sched_line = solver.line_of("p_schedule");
    let schedule: Option<Vec<f64>> = solver.list("p_schedule", "a comma-separated list of numbers")?;
    solver.reject_unused()?;
    let scalar_p = |what: &str| -> Result<f64> {
        if schedule.is_some() {
            return Err(Error::config(sched_line, format!("{what} takes scalar p, not p_schedule")));
        }
        check_p(p_line, p.ok_or_else(|| Error::config(p_line, format!("missing required key p for {what}")))?)
    };
    let sched = |what: &str| -> Result<Vec<f64>> {
        if p.is_some() {
            return Err(Error::config(p_line, format!("{what} takes p_schedule, not scalar p")));
        }
        let s = schedule.clone().unwrap_or_else(|| DEFAULT_SCHEDULE.to_vec());
        for &q in &s {
            check_p(sched_line, q)?;
        }
        if s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config(sched_line, "p_schedule must be strictly increasing"));
        }
        Ok(s)
    };
    let no_solver_p = |what: &str| -> Result<()> {
        if p.is_some() || schedule.is_some() {
            let line = if p.is_some() { p_line } else { sched_line };
            return Err(Error::config(line, format!("{what} takes no exponent")));
        }
        Ok(())
    };
    let single_domain = |domains: &mut Vec<Section>| -> Result<ShapeSpec> {
        match domains.len() {
            0 => Err(Error::config(1, format!("{} needs a [domain] section", cmd.name()))),
            1 => {
                let d = parse_domain(&mut domains[0])?;
                domains[0].reject_unused()?;
                Ok(d)
            }
            _ => Err(Error::config(domains[1].line, format!("{} takes one [domain] section", cmd.name()))),
        }
    };
    let no_domains = |domains: &Vec<Section>| -> Result<()> {
        match domains.first() {
            Some(d) => Err(Error::config(d.line, format!("[domain] does not apply to {}", cmd.name()))),
            None => Ok(()),
        }
    };

    let task = match cmd {
        Command::Solve => {
            unexpected(&conv)?;
            unexpected(&oracle)?;
            unexpected(&plot)?;
            Task::Solve {
                p: scalar_p("solve")?,
                domain: single_domain(&mut domains)?,
            }
        }
        Command::Continuation => {
            unexpected(&conv)?;
            unexpected(&oracle)?;
            unexpected(&plot)?;
            Task::Continuation {
                schedule: sched("continuation")?,
                domain: single_domain(&mut domains)?,
            }
        }
        Command::FaberKrahn => {
            unexpected(&conv)?;
            unexpected(&oracle)?;
            unexpected(&plot)?;
            let schedule = sched("faber-krahn")?;
            let mut specs = Vec::with_capacity(domains.len());
            for d in &mut domains {
                specs.push(parse_domain(d)?);
                d.reject_unused()?;
            }
            Task::FaberKrahn { domains: specs, schedule }
        }
        Command::Convergence => {
            unexpected(&oracle)?;
            unexpected(&plot)?;
            let p = scalar_p("convergence")?;
            let domain = single_domain(&mut domains)?;
            let mut c = conv.ok_or_else(|| Error::config(1, "convergence needs a [convergence] section"))?;
            let hs: Option<Vec<f64>> = c.list("h", "a comma-separated list of spacings")?;
            let ms: Option<Vec<usize>> = c.list("cells", "a comma-separated list of integers")?;
            let resolutions: Vec<Resolution> = match (hs, ms) {
                (Some(hs), None) if hs.iter().all(|&h| h > 0.0 && h.is_finite()) => {
                    hs.into_iter().map(Resolution::Spacing).collect()
                }
                (None, Some(ms)) if ms.iter().all(|&m| m >= 2) => ms.into_iter().map(Resolution::Cells).collect(),
                (None, None) => return Err(c.missing("h")),
                _ => return Err(Error::config(c.line, "give positive h values or cells ≥ 2, not both")),
            };
            if resolutions.len() < 3 {
                return Err(Error::config(c.line, "convergence needs at least 3 resolutions"));
            }
            c.reject_unused()?;
            Task::Convergence { domain, p, resolutions }
        }
        Command::Oracle => {
            unexpected(&conv)?;
            unexpected(&plot)?;
            no_domains(&domains)?;
            no_solver_p("oracle")?;
            let mut o = oracle.ok_or_else(|| Error::config(1, "oracle needs an [oracle] section"))?;
            let (line, kind) = o.take("kind").ok_or_else(|| o.missing("kind"))?;
            let dim = |o: &mut Section| -> Result<usize> {
                match o.integer("n")? {
                    Some(0) => Err(Error::config(o.line_of("n"), "n must be at least 1")),
                    Some(n) => Ok(n),
                    None => Err(o.missing("n")),
                }
            };
            let samples = |o: &mut Section| -> Result<usize> {
                match o.integer("samples")? {
                    Some(s) if s < 2 => Err(Error::config(o.line_of("samples"), "samples must be at least 2")),
                    Some(s) => Ok(s),
                    None => Ok(512),
                }
            };
            let dims = |o: &mut Section| -> Result<Vec<usize>> {
                let l: Vec<usize> = o
                    .list("n_values", "a comma-separated list of integers")?
                    .ok_or_else(|| o.missing("n_values"))?;
                if l.contains(&0) {
                    return Err(Error::config(o.line_of("n_values"), "dimensions must be at least 1"));
                }
                Ok(l)
            };
            let task = match kind.as_str() {
                "clamped_profile" => OracleTask::ClampedProfile {
                    n: dim(&mut o)?,
                    samples: samples(&mut o)?,
                },
                "torsion" => OracleTask::Torsion {
                    n: dim(&mut o)?,
                    radius: o.positive("radius")?.unwrap_or(1.0),
                    samples: samples(&mut o)?,
                },
                "ball_lambda" => OracleTask::BallLambda {
                    n_values: dims(&mut o)?,
                    radius: o.positive("radius")?.unwrap_or(1.0),
                },
                "remark9" => OracleTask::Remark9 { n_values: dims(&mut o)? },
                _ => return Err(Error::config(line, format!("unknown oracle kind {kind:?}"))),
            };
            o.reject_unused()?;
            Task::Oracle(task)
        }
        Command::Plot => {
            unexpected(&conv)?;
            unexpected(&oracle)?;
            no_domains(&domains)?;
            no_solver_p("plot")?;
            let mut s = plot.ok_or_else(|| Error::config(1, "plot needs a [plot] section"))?;
            let (line, kind) = s.take("kind").ok_or_else(|| s.missing("kind"))?;
            let kind = PlotKind::from_name(&kind)
                .ok_or_else(|| Error::config(line, format!("unknown plot kind {kind:?}")))?;
            let (_, input) = s.take("input").ok_or_else(|| s.missing("input"))?;
            let output = s
                .take("output")
                .map(|(_, v)| v)
                .unwrap_or_else(|| format!("{}.svg", kind.name()));
            let columns = match (s.take("x"), s.take("y")) {
                (Some((_, x)), Some((_, y))) => Some((x, y)),
                (None, None) => None,
                _ => return Err(Error::config(s.line, "give both x and y columns or neither")),
            };
            if columns.is_some() && kind != PlotKind::Radial {
                return Err(Error::config(s.line, "x and y apply to radial plots only"));
            }
            s.reject_unused()?;
            Task::Plot(PlotTask {
                kind,
                input: PathBuf::from(input),
                output,
                columns,
            })
        }
    };
    Ok(RunConfig {
        task,
        bc,
        tol,
        max_iter,
        seed,
        out,
    })
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_for(text, None)
}

fn list<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn write_domain(out: &mut String, d: &ShapeSpec) {
    let _ = writeln!(out, "\n[domain]\nshape = {}", d.shape.kind().name());
    let pairs: Vec<(&str, f64)> = match d.shape {
        Shape::Interval { half_length } => vec![("half_length", half_length)],
        Shape::Disk { radius } => vec![("radius", radius)],
        Shape::Rectangle { width, height } => vec![("width", width), ("height", height)],
        Shape::Ellipse { semi_x, semi_y } => vec![("semi_x", semi_x), ("semi_y", semi_y)],
        Shape::Stadium { length, radius } => vec![("length", length), ("radius", radius)],
        Shape::LShape { arm } => vec![("arm", arm)],
    };
    for (k, v) in pairs {
        let _ = writeln!(out, "{k} = {}", num(v));
    }
    match d.resolution {
        Resolution::Spacing(h) => writeln!(out, "h = {}", num(h)),
        Resolution::Cells(m) => writeln!(out, "cells = {m}"),
    }
    .unwrap();
}

/// Canonical text of a configuration; `parse_config` reads it back to an
/// equal value.
pub fn serialize(cfg: &RunConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "command = {}", cfg.command().name());
    let _ = writeln!(out, "seed = {}", cfg.seed);
    if let Some(o) = &cfg.out {
        let _ = writeln!(out, "out = {}", o.display());
    }
    let _ = writeln!(out, "\n[solver]\nbc = {}", cfg.bc.name());
    let _ = writeln!(out, "tol = {}", num(cfg.tol));
    let _ = writeln!(out, "max_iter = {}", cfg.max_iter);
    match &cfg.task {
        Task::Solve { domain, p } => {
            let _ = writeln!(out, "p = {}", num(*p));
            write_domain(&mut out, domain);
        }
        Task::Continuation { domain, schedule } => {
            let _ = writeln!(out, "p_schedule = {}", list(schedule));
            write_domain(&mut out, domain);
        }
        Task::FaberKrahn { domains, schedule } => {
            let _ = writeln!(out, "p_schedule = {}", list(schedule));
            for d in domains {
                write_domain(&mut out, d);
            }
        }
        Task::Convergence { domain, p, resolutions } => {
            let _ = writeln!(out, "p = {}", num(*p));
            write_domain(&mut out, domain);
            out.push_str("\n[convergence]\n");
            let hs: Vec<f64> = resolutions
                .iter()
                .filter_map(|r| match r {
                    Resolution::Spacing(h) => Some(*h),
                    Resolution::Cells(_) => None,
                })
                .collect();
            if hs.len() == resolutions.len() {
                let _ = writeln!(out, "h = {}", list(&hs));
            } else {
                let ms: Vec<usize> = resolutions
                    .iter()
                    .filter_map(|r| match r {
                        Resolution::Cells(m) => Some(*m),
                        Resolution::Spacing(_) => None,
                    })
                    .collect();
                let _ = writeln!(out, "cells = {}", list(&ms));
            }
        }
        Task::Oracle(o) => {
            out.push_str("\n[oracle]\n");
            let _ = match o {
                OracleTask::ClampedProfile { n, samples } => {
                    writeln!(out, "kind = clamped_profile\nn = {n}\nsamples = {samples}")
                }
                OracleTask::Torsion { n, radius, samples } => writeln!(
                    out,
                    "kind = torsion\nn = {n}\nradius = {}\nsamples = {samples}",
                    num(*radius)
                ),
                OracleTask::BallLambda { n_values, radius } => writeln!(
                    out,
                    "kind = ball_lambda\nn_values = {}\nradius = {}",
                    list(n_values),
                    num(*radius)
                ),
                OracleTask::Remark9 { n_values } => writeln!(out, "kind = remark9\nn_values = {}", list(n_values)),
            };
        }
        Task::Plot(p) => {
            out.push_str("\n[plot]\n");
            let _ = writeln!(out, "kind = {}\ninput = {}\noutput = {}", p.kind.name(), p.input.display(), p.output);
            if let Some((x, y)) = &p.columns {
                let _ = writeln!(out, "x = {x}\ny = {y}");
            }
        }
    }
    out
}
