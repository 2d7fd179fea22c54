use std::path::Path;
use std::process::{Command, Output};

use bess_core::config::DEFAULT_CONFIG_TEXT;
use bess_core::harness::metrics::log_from_csv;
use bess_core::harness::EnergyMetrics;

fn bess(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bess")).current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn unit_disk(dir: &Path) -> String {
    let path = dir.join("disk.conf");
    std::fs::write(&path, "[curve]\nvac_pu = 1\nvdc_pu = 1\ndisk = 0 0 1\n").unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn overload_projects_onto_unit_circle() {
    let dir = tempfile::tempdir().unwrap();
    let curves = unit_disk(dir.path());
    let o = bess(dir.path(), &["project", "--curves", &curves, "--p0", "1.2", "--q0", "0", "--method", "opt"]);
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o);
    let cols: Vec<&str> = line.trim().split(',').collect();
    let p: f64 = cols[0].parse().unwrap();
    let q: f64 = cols[1].parse().unwrap();
    assert!((p - 1.0).abs() <= 1e-4 && q.abs() <= 1e-4, "{line}");
    assert_eq!(&cols[2..], ["true", "feasible"]);
}

#[test]
fn fast_passthrough_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let o = bess(dir.path(), &["project", "--p0", "0.3", "--q0", "0.2", "--method", "fast"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0.3,0.2,true,passthrough\n");
}

#[test]
fn empty_region_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // full battery: no charging, and the open-circuit voltage sits below the DC minimum
    let cfg = DEFAULT_CONFIG_TEXT.replace("vdc_min_pu = 0.8571428571428571", "vdc_min_pu = 1.05");
    assert_ne!(cfg, DEFAULT_CONFIG_TEXT);
    std::fs::write(dir.path().join("bess.conf"), cfg).unwrap();
    let o = bess(dir.path(), &["project", "--p0", "0.5", "--q0", "0", "--soc", "0.9"]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.conf"), DEFAULT_CONFIG_TEXT.replace("eta = 0.95", "eta = 0")).unwrap();
    let o = bess(dir.path(), &["project", "--config", "bad.conf", "--p0", "0", "--q0", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("control.eta") && err.lines().count() == 1, "{err}");

    let o = bess(dir.path(), &["project", "--config", "missing.conf", "--p0", "0", "--q0", "0"]);
    assert_eq!(o.status.code(), Some(2));

    let o = bess(dir.path(), &["simulate", "--method", "opt", "--log", "l.csv", "--metrics", "m.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("--trace"));
}

#[test]
fn trace_simulate_metrics_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for name in ["a.csv", "b.csv"] {
        let o = bess(d, &["gen-trace", "--seed", "9", "--duration-s", "120", "--out", name]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(d.join("a.csv")).unwrap(), std::fs::read(d.join("b.csv")).unwrap());

    for method in ["opt", "fast", "baseline"] {
        let log = format!("log_{method}.csv");
        let met = format!("met_{method}.csv");
        let o = bess(d, &["simulate", "--trace", "a.csv", "--method", method, "--log", &log, "--metrics", &met]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let o = bess(d, &["metrics", "--log", &log]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o), std::fs::read_to_string(d.join(&met)).unwrap());
        let records = log_from_csv(&std::fs::read_to_string(d.join(&log)).unwrap()).unwrap();
        assert_eq!(records.len(), 1200);
        let m = EnergyMetrics::from_csv(&stdout(&o)).unwrap();
        assert!(m.tde >= 0.0 && m.tce >= 0.0 && m.tse <= m.tde + m.tce);
    }
}

#[test]
fn simulate_is_deterministic_apart_from_latency() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    bess(d, &["gen-trace", "--seed", "4", "--duration-s", "60", "--out", "t.csv"]);
    for log in ["x.csv", "y.csv"] {
        let o = bess(d, &["simulate", "--trace", "t.csv", "--method", "fast", "--log", log, "--metrics", "m.csv"]);
        assert_eq!(o.status.code(), Some(0));
    }
    let strip = |name: &str| {
        let mut v = log_from_csv(&std::fs::read_to_string(d.join(name)).unwrap()).unwrap();
        v.iter_mut().for_each(|r| r.latency_us = 0.0);
        v
    };
    assert_eq!(strip("x.csv"), strip("y.csv"));
}

#[test]
fn discretize_writes_a_loadable_table() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let curves = unit_disk(d);
    let o = bess(d, &["discretize", "--curves", &curves, "--vac", "1", "--vdc", "1", "--soc", "0.5", "--out", "table.csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(d.join("table.csv")).unwrap();
    let table = bess_core::discretizer::RayTable::from_csv(&text).unwrap();
    assert_eq!(table.sectors(), 360);
    assert!(table.smax.iter().all(|r| (r - 1.0).abs() < 1e-12));
    assert_eq!(table.context.curves_hash.as_ref().map(String::len), Some(64));

    bess(d, &["gen-trace", "--duration-s", "30", "--out", "t.csv"]);
    let o = bess(
        d,
        &["simulate", "--curves", &curves, "--trace", "t.csv", "--method", "fast", "--table", "table.csv", "--log", "l.csv", "--metrics", "m.csv"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bench_writes_histograms() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    bess(d, &["gen-trace", "--duration-s", "30", "--out", "t.csv"]);
    let o = bess(d, &["bench", "--trace", "t.csv", "--out", "lat", "--reps", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = stdout(&o);
    assert!(summary.starts_with("method,median_us,p99_us,max_us\nopt,"));
    for f in ["lat_opt.csv", "lat_fast.csv"] {
        let text = std::fs::read_to_string(d.join(f)).unwrap();
        let total: usize = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap()).sum();
        assert_eq!(total, 200);
    }
}

#[test]
fn simulate_prints_metrics_without_output_files() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(bess(dir.path(), &["gen-trace", "--duration-s", "60", "--out", "t.csv"]).status.code(), Some(0));
    let o = bess(dir.path(), &["simulate", "--trace", "t.csv", "--method", "baseline"]);
    assert_eq!(o.status.code(), Some(0));
    let m = EnergyMetrics::from_csv(&stdout(&o)).unwrap();
    assert_eq!(m.tse, 0.0);
    let o = bess(dir.path(), &["simulate", "--trace", "t.csv", "--method", "opt", "--metrics", "m.csv"]);
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), ""));
}
