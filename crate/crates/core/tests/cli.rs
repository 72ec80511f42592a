use std::fs;
use std::path::Path;
use std::process::Command as Process;

use infbilap::cli::{emit_plot, parse_config, run, serialize, OracleTask, PlotKind, RunConfig, Task};
use infbilap::geometry::{Resolution, Shape, ShapeKind, ShapeSpec};
use infbilap::io::{FlatRecord, LatticeDump, Table};
use infbilap::operators::BcKind;
use proptest::prelude::*;

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

const DISK_CONTINUATION: &str = "\
command = continuation

[solver]
bc = hinged
p_schedule = 2,4,8,16

[domain]
shape = disk
radius = 1
h = 0.05
";

#[test]
fn continuation_writes_trace_field_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(DISK_CONTINUATION).unwrap();
    let summary = run(&cfg, dir.path()).unwrap();
    for f in ["trace.csv", "fit.txt", "u.txt", "laplacian.txt", "structure.txt", "manifest.txt", "config.txt"] {
        assert!(summary.files.iter().any(|s| s == f), "{f} missing");
    }
    let trace = Table::parse_csv(&read(dir.path(), "trace.csv")).unwrap();
    assert_eq!(trace.numbers("p").unwrap(), vec![2.0, 4.0, 8.0, 16.0]);
    let lambdas = trace.numbers("lambda").unwrap();
    assert!(lambdas.windows(2).all(|w| w[1] < w[0]));
    let u = LatticeDump::parse(&read(dir.path(), "u.txt")).unwrap();
    assert_eq!(u.dim, 2);
    let rep = FlatRecord::parse(&read(dir.path(), "structure.txt")).unwrap();
    assert!(rep.get_f64("hinged_constancy").unwrap() < 0.5);
    // the canonical config reruns to the same configuration
    assert_eq!(parse_config(&read(dir.path(), "config.txt")).unwrap(), cfg);
    assert!(dir.path().join("timing.txt").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = parse_config(DISK_CONTINUATION).unwrap();
    let files = run(&cfg, a.path()).unwrap().files;
    run(&cfg, b.path()).unwrap();
    for f in files {
        assert_eq!(fs::read(a.path().join(&f)).unwrap(), fs::read(b.path().join(&f)).unwrap(), "{f}");
    }
}

#[test]
fn oracle_profile_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config("command = oracle\n[oracle]\nkind = clamped_profile\nn = 2\n").unwrap();
    run(&cfg, dir.path()).unwrap();
    let t = Table::parse_csv(&read(dir.path(), "clamped_profile.csv")).unwrap();
    assert_eq!(t.rows.len(), 512);
    let w = t.numbers("w").unwrap();
    assert!((w[0] - 2f64.ln() / 4.0).abs() < 1e-15);
}

#[test]
fn faber_krahn_four_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("command = faber-krahn\n[solver]\np_schedule = 2,4,8\n");
    for (shape, aspect) in [("disk", 1), ("rectangle", 1), ("rectangle", 2), ("ellipse", 2)] {
        text.push_str(&format!("[domain]\nshape = {shape}\nunit_area = true\naspect = {aspect}\nh = 0.05\n"));
    }
    let cfg = parse_config(&text).unwrap();
    let files = run(&cfg, dir.path()).unwrap().files;
    let t = Table::parse_csv(&read(dir.path(), "faber_krahn.csv")).unwrap();
    assert_eq!(t.rows.len(), 4);
    let refs: Vec<String> = t.rows.iter().map(|r| r[t.column("trace_ref").unwrap()].clone()).collect();
    for r in &refs {
        assert!(files.contains(r), "{r}");
    }
    let ratio = t.numbers("ratio").unwrap();
    assert!(ratio[1..].iter().all(|&r| r > ratio[0]));
}

#[test]
fn plots_from_run_outputs() {
    let dir = tempfile::tempdir().unwrap();
    run(&parse_config(DISK_CONTINUATION).unwrap(), dir.path()).unwrap();
    let trace = emit_plot(PlotKind::Trace, &read(dir.path(), "trace.csv"), None).unwrap();
    assert!(trace.contains("<polyline") && trace.contains("fit at 1/p = 0"));
    let heat = emit_plot(PlotKind::Heatmap, &read(dir.path(), "laplacian.txt"), None).unwrap();
    assert!(heat.matches("<rect").count() > 1000);

    let cfg = format!(
        "command = plot\n[plot]\nkind = trace\ninput = {}\noutput = trace.svg\n",
        dir.path().join("trace.csv").display()
    );
    let out = tempfile::tempdir().unwrap();
    run(&parse_config(&cfg).unwrap(), out.path()).unwrap();
    assert_eq!(read(out.path(), "trace.svg"), trace);
}

fn binary() -> Process {
    Process::new(env!("CARGO_BIN_EXE_infbilap"))
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    };
    let ok = write("ok.cfg", "[oracle]\nkind = remark9\nn_values = 3,10,50\n");
    let out = dir.path().join("out");
    let status = binary()
        .args(["oracle", "--config"])
        .arg(&ok)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("remark9.csv").exists());

    let bad = write("bad.cfg", "[solver]\np = 2\ntol = -1\n[domain]\nshape = disk\nradius = 1\nh = 0.1\n");
    let o = binary().args(["solve", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let tiny = write(
        "tiny.cfg",
        "[solver]\np = 2\n[domain]\nshape = disk\nradius = 0.01\nh = 0.1\n",
    );
    let code = binary().args(["solve", "--config"]).arg(&tiny).arg("--out").arg(&out).status().unwrap().code();
    assert_eq!(code, Some(3));

    let missing = dir.path().join("nope.cfg");
    let code = binary().args(["solve", "--config"]).arg(&missing).status().unwrap().code();
    assert_eq!(code, Some(4));

    let plot = write("plot.cfg", "[plot]\nkind = trace\ninput = /nonexistent/trace.csv\n");
    let code = binary().args(["plot", "--config"]).arg(&plot).arg("--out").arg(&out).status().unwrap().code();
    assert_eq!(code, Some(4));
}

fn shape_strategy() -> impl Strategy<Value = ShapeSpec> {
    let len = 0.1f64..3.0;
    prop_oneof![
        (len.clone(), 2usize..500).prop_map(|(l, m)| ShapeSpec::new(Shape::Interval { half_length: l }, Resolution::Cells(m))),
        (len.clone(), 0.001f64..0.1).prop_map(|(r, h)| ShapeSpec::new(Shape::Disk { radius: r }, Resolution::Spacing(h))),
        (len.clone(), len.clone(), 0.001f64..0.1)
            .prop_map(|(a, b, h)| ShapeSpec::new(Shape::Rectangle { width: a, height: b }, Resolution::Spacing(h))),
        (len.clone(), len.clone(), 0.001f64..0.1)
            .prop_map(|(a, b, h)| ShapeSpec::new(Shape::Ellipse { semi_x: a, semi_y: b }, Resolution::Spacing(h))),
        (1.0f64..4.0, 0.001f64..0.1)
            .prop_map(|(a, h)| ShapeSpec::new(Shape::unit_area(ShapeKind::Stadium, a), Resolution::Spacing(h))),
        (len, 0.001f64..0.1).prop_map(|(a, h)| ShapeSpec::new(Shape::LShape { arm: a }, Resolution::Spacing(h))),
    ]
}

fn schedule_strategy() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::btree_set(2u32..=256, 1..8).prop_map(|s| s.into_iter().map(f64::from).collect())
}

fn task_strategy() -> impl Strategy<Value = Task> {
    prop_oneof![
        (shape_strategy(), 2.0f64..256.0).prop_map(|(domain, p)| Task::Solve { domain, p }),
        (shape_strategy(), schedule_strategy()).prop_map(|(domain, schedule)| Task::Continuation { domain, schedule }),
        (proptest::collection::vec(shape_strategy(), 0..4), schedule_strategy())
            .prop_map(|(domains, schedule)| Task::FaberKrahn { domains, schedule }),
        (shape_strategy(), 2.0f64..256.0, proptest::collection::vec(0.001f64..0.5, 3..6)).prop_map(
            |(domain, p, hs)| Task::Convergence {
                domain,
                p,
                resolutions: hs.into_iter().map(Resolution::Spacing).collect(),
            }
        ),
        (1usize..60, 2usize..2000).prop_map(|(n, samples)| Task::Oracle(OracleTask::ClampedProfile { n, samples })),
        (proptest::collection::vec(1usize..80, 1..6), 0.1f64..5.0)
            .prop_map(|(n_values, radius)| Task::Oracle(OracleTask::BallLambda { n_values, radius })),
        proptest::collection::vec(1usize..80, 1..6).prop_map(|n_values| Task::Oracle(OracleTask::Remark9 { n_values })),
    ]
}

proptest! {
    #[test]
    fn config_round_trip(
        task in task_strategy(),
        clamped in any::<bool>(),
        tol in 1e-14f64..1e-2,
        max_iter in 1usize..100_000,
        seed in any::<u64>(),
    ) {
        let cfg = RunConfig {
            task,
            bc: if clamped { BcKind::Clamped } else { BcKind::Hinged },
            tol,
            max_iter,
            seed,
            out: None,
        };
        let text = serialize(&cfg);
        prop_assert_eq!(parse_config(&text).unwrap(), cfg);
    }
}
