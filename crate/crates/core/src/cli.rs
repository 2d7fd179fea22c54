//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when no feasible setpoint exists, 2 on any
//! usage, configuration or parse error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::battery::BatteryState;
use crate::capability::{CapabilityCurveSet, DEFAULT_CURVES_TEXT};
use crate::config::{Config, DEFAULT_CONFIG_TEXT};
use crate::discretizer::{self, RayTable, StaticContext};
use crate::harness::bench::{self, BenchOptions};
use crate::harness::metrics::{log_from_csv, log_to_csv};
use crate::harness::{self, Controller, EnergyMetrics, Method, OuParams, Trace};
use crate::optimizer::{self, ProjectionProblem, SolveError};
use crate::units::Setpoint;

#[derive(Debug, Parser)]
#[command(name = "bess", version, about = "Battery setpoint projection and control-loop simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Inputs {
    /// Run configuration [default: ./bess.conf, else built-in]
    #[arg(long)]
    config: Option<PathBuf>,
    /// Capability curve set [default: built-in]
    #[arg(long)]
    curves: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum ProjectMethod {
    Opt,
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum SimMethod {
    Opt,
    Fast,
    Baseline,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic grid trace
    GenTrace {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long = "duration-s", default_value_t = 3600.0)]
        duration_s: f64,
        /// Frequency volatility [Hz/sqrt(s)]
        #[arg(long = "f-vol")]
        f_vol: Option<f64>,
        /// AC voltage volatility [pu/sqrt(s)]
        #[arg(long = "v-vol")]
        v_vol: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the per-angle radius table for one operating point
    Discretize {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = 1.0)]
        vac: f64,
        /// DC-bus voltage [pu] [default: open-circuit voltage at --soc]
        #[arg(long)]
        vdc: Option<f64>,
        /// [default: battery.soc0]
        #[arg(long)]
        soc: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        resolution: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Project one initial setpoint; prints `p,q,tight,status`
    Project {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, allow_hyphen_values = true)]
        p0: f64,
        #[arg(long, allow_hyphen_values = true)]
        q0: f64,
        #[arg(long, default_value_t = 1.0)]
        vac: f64,
        #[arg(long)]
        vdc: Option<f64>,
        #[arg(long)]
        soc: Option<f64>,
        #[arg(long, value_enum, default_value_t = ProjectMethod::Opt)]
        method: ProjectMethod,
    },
    /// Run the closed loop over a trace
    Simulate {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, value_enum)]
        method: SimMethod,
        /// Initial radius table for the fast method
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        resolution: f64,
        #[arg(long)]
        log: Option<PathBuf>,
        /// Printed to stdout when omitted
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Time both projections over a trace; writes `<out>_opt.csv` and `<out>_fast.csv`
    Bench {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        warmup: usize,
        #[arg(long, default_value_t = 32)]
        reps: usize,
    },
    /// Recompute energy metrics from a tick log
    Metrics {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        log: PathBuf,
    },
}

#[derive(Debug)]
enum Failure {
    Infeasible(String),
    Usage(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Infeasible(_) => 1,
            Failure::Usage(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Infeasible(m) | Failure::Usage(m) => m,
        }
    }
}

type CliResult = Result<(), Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult {
    std::fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn load_config(path: Option<&Path>) -> Result<Config, Failure> {
    let text = match path {
        Some(p) => read(p)?,
        None if Path::new("bess.conf").exists() => read(Path::new("bess.conf"))?,
        None => DEFAULT_CONFIG_TEXT.to_string(),
    };
    Config::parse(&text).map_err(|e| usage(format!("config: {e}")))
}

/// Curve set and the SHA-256 of its source text.
fn load_curves(path: Option<&Path>) -> Result<(CapabilityCurveSet, String), Failure> {
    let text = match path {
        Some(p) => read(p)?,
        None => DEFAULT_CURVES_TEXT.to_string(),
    };
    let set = CapabilityCurveSet::parse(&text).map_err(|e| usage(format!("curves: {e}")))?;
    Ok((set, hex::encode(Sha256::digest(text.as_bytes()))))
}

fn load_trace(path: &Path) -> Result<Trace, Failure> {
    Trace::from_csv(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn operating_state(cfg: &Config, vdc: Option<f64>, soc: Option<f64>) -> Result<BatteryState, Failure> {
    let soc = soc.unwrap_or(cfg.soc0);
    if !(0.0..=1.0).contains(&soc) {
        return Err(usage(format!("--soc must lie in [0, 1], got {soc}")));
    }
    let mut state = BatteryState::at_rest(soc, &cfg.battery);
    if let Some(v) = vdc {
        if !(v > 0.0) {
            return Err(usage(format!("--vdc must be positive, got {v}")));
        }
        state.v_dc = v;
    }
    Ok(state)
}

fn execute(cmd: Command, out: &mut dyn Write) -> CliResult {
    let emit = |out: &mut dyn Write, s: &str| out.write_all(s.as_bytes()).map_err(usage);
    match cmd {
        Command::GenTrace { seed, duration_s, f_vol, v_vol, out: path } => {
            let d = OuParams::default();
            let params = OuParams { f_vol: f_vol.unwrap_or(d.f_vol), v_vol: v_vol.unwrap_or(d.v_vol), ..d };
            let trace = harness::gen_trace(seed, duration_s, &params).map_err(usage)?;
            write(&path, &trace.to_csv())
        }
        Command::Discretize { inputs, vac, vdc, soc, resolution, out: path } => {
            let cfg = load_config(inputs.config.as_deref())?;
            let (curves, hash) = load_curves(inputs.curves.as_deref())?;
            let state = operating_state(&cfg, vdc, soc)?;
            let ctx = StaticContext::measured(&curves, vac, &state, &cfg.battery, &cfg.control, &cfg.base);
            let mut table = discretizer::build_table(&ctx, resolution).map_err(usage)?;
            table.context.curves_hash = Some(hash);
            write(&path, &table.to_csv())
        }
        Command::Project { inputs, p0, q0, vac, vdc, soc, method } => {
            let cfg = load_config(inputs.config.as_deref())?;
            let (curves, _) = load_curves(inputs.curves.as_deref())?;
            let state = operating_state(&cfg, vdc, soc)?;
            let s0 = Setpoint::new(p0, q0);
            let curve = curves.select_curve(vac, state.v_dc);
            let prob = ProjectionProblem::from_state(s0, curve, &state, &cfg.battery, &cfg.control, &cfg.base);
            let line = match method {
                ProjectMethod::Opt => match optimizer::solve(&prob) {
                    Ok(r) => format!("{},{},{},{}\n", r.s.p, r.s.q, r.tight, r.status.as_str()),
                    Err(SolveError::Infeasible) => return Err(Failure::Infeasible("no feasible setpoint".into())),
                    Err(e) => return Err(Failure::Infeasible(e.to_string())),
                },
                ProjectMethod::Fast => {
                    let ctx = StaticContext::measured(&curves, vac, &state, &cfg.battery, &cfg.control, &cfg.base);
                    let table = discretizer::build_table(&ctx, 1.0).map_err(usage)?;
                    let s = discretizer::fast_project(&s0, &table);
                    let tight = prob.v_star(prob.p_dc(s.p)).map(|v| v.tight).unwrap_or(false);
                    let status = if s == s0 { "passthrough" } else { "clipped" };
                    format!("{},{},{},{}\n", s.p, s.q, tight, status)
                }
            };
            emit(out, &line)
        }
        Command::Simulate { inputs, trace, method, table, resolution, log, metrics } => {
            let cfg = load_config(inputs.config.as_deref())?;
            let (curves, _) = load_curves(inputs.curves.as_deref())?;
            let trace = load_trace(&trace)?;
            let method = match method {
                SimMethod::Opt => Method::Optimizer,
                SimMethod::Fast => Method::Fast,
                SimMethod::Baseline => Method::Baseline,
            };
            let mut ctl = Controller::new(&cfg, &curves, method).with_resolution(resolution);
            if let Some(p) = table {
                let t = RayTable::from_csv(&read(&p)?).map_err(|e| usage(format!("{}: {e}", p.display())))?;
                ctl = ctl.with_table(t);
            }
            let result = harness::run(ctl, &trace).map_err(usage)?;
            if let Some(log) = log {
                write(&log, &log_to_csv(&result.log))?;
            }
            match metrics {
                Some(p) => write(&p, &result.metrics.to_csv()),
                None => emit(out, &result.metrics.to_csv()),
            }
        }
        Command::Bench { inputs, trace, out: prefix, warmup, reps } => {
            let cfg = load_config(inputs.config.as_deref())?;
            let (curves, _) = load_curves(inputs.curves.as_deref())?;
            let trace = load_trace(&trace)?;
            let opts = BenchOptions { warmup, reps, ..BenchOptions::default() };
            let report = bench::bench(&trace, &cfg, &curves, &opts).map_err(usage)?;
            let stem = prefix.to_string_lossy();
            write(Path::new(&format!("{stem}_opt.csv")), &bench::histogram_csv(&report.opt_us))?;
            write(Path::new(&format!("{stem}_fast.csv")), &bench::histogram_csv(&report.fast_us))?;
            let mut text = String::from("method,median_us,p99_us,max_us\n");
            for (name, v) in [("opt", &report.opt_us), ("fast", &report.fast_us)] {
                let s = bench::summarize(v);
                text.push_str(&format!("{name},{},{},{}\n", s.median_us, s.p99_us, s.max_us));
            }
            emit(out, &text)
        }
        Command::Metrics { config, log } => {
            let cfg = load_config(config.as_deref())?;
            let records = log_from_csv(&read(&log)?).map_err(|e| usage(format!("{}: {e}", log.display())))?;
            let m = EnergyMetrics::from_log(&records, cfg.control.tick, cfg.base.s_base);
            emit(out, &m.to_csv())
        }
    }
}

/// Collapses a clap error onto one line, dropping the usage hints.
fn one_line(e: &clap::Error) -> String {
    e.to_string()
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with("Usage:") && !l.starts_with("For more information"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = write!(out, "{e}");
            return 0;
        }
        Err(e) => {
            let _ = writeln!(err, "{}", one_line(&e));
            return 2;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}
