//! Per-call latency of the exact projection against the table lookup on
//! identical inputs.

use std::fmt::Write as _;
use std::hint::black_box;

use super::{timed, Controller, Method, Trace};
use crate::capability::CapabilityCurveSet;
use crate::config::Config;
use crate::discretizer::{self, TableError};
use crate::droop;
use crate::optimizer;
use crate::units::Setpoint;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchOptions {
    /// Leading ticks excluded from the statistics.
    pub warmup: usize,
    /// Calls averaged into each per-tick sample.
    pub reps: usize,
    pub resolution_deg: f64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self { warmup: 100, reps: 32, resolution_deg: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencySummary {
    pub median_us: f64,
    pub p99_us: f64,
    pub max_us: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    /// Initial setpoint of every measured tick.
    pub inputs: Vec<Setpoint>,
    pub opt_us: Vec<f64>,
    pub fast_us: Vec<f64>,
}

/// Nearest-rank percentile, `q` in (0, 1].
pub fn percentile(samples: &[f64], q: f64) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let rank = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

pub fn summarize(samples: &[f64]) -> LatencySummary {
    LatencySummary {
        median_us: percentile(samples, 0.5),
        p99_us: percentile(samples, 0.99),
        max_us: samples.iter().copied().fold(f64::NAN, f64::max),
    }
}

/// Log-spaced histogram, ten bins per decade.
pub fn histogram(samples: &[f64]) -> Vec<(f64, f64, usize)> {
    let bin = |x: f64| (x.max(1e-6).log10() * 10.0).floor() as i64;
    let mut counts = std::collections::BTreeMap::new();
    for &x in samples {
        *counts.entry(bin(x)).or_insert(0usize) += 1;
    }
    let (Some(&lo), Some(&hi)) = (counts.keys().next(), counts.keys().next_back()) else {
        return Vec::new();
    };
    (lo..=hi)
        .map(|k| (10f64.powf(k as f64 / 10.0), 10f64.powf((k + 1) as f64 / 10.0), counts.get(&k).copied().unwrap_or(0)))
        .collect()
}

pub fn histogram_csv(samples: &[f64]) -> String {
    let mut out = String::from("bin_lo_us,bin_hi_us,count\n");
    for (lo, hi, n) in histogram(samples) {
        let _ = writeln!(out, "{lo},{hi},{n}");
    }
    out
}

/// Drives the plant with the exact projection and, at every tick, times both
/// projections on that tick's inputs. Table builds happen outside the timed
/// region, as they would offline.
pub fn bench(trace: &Trace, config: &Config, curves: &CapabilityCurveSet, opts: &BenchOptions) -> Result<BenchReport, TableError> {
    let reps = opts.reps.max(1);
    let mut ctl = Controller::new(config, curves, Method::Optimizer).with_resolution(opts.resolution_deg);
    let mut report = BenchReport { inputs: Vec::new(), opt_us: Vec::new(), fast_us: Vec::new() };
    for (k, m) in trace.samples.iter().enumerate() {
        let s0 = droop::initial_setpoint(m, &config.droop, &config.base);
        let prob = ctl.problem(s0, m.v_ac);
        let table = ctl.current_table(m.v_ac)?.clone();

        let time_opt = || {
            timed(|| {
                for _ in 0..reps {
                    let _ = black_box(optimizer::solve(black_box(&prob)));
                }
            })
            .1
        };
        let time_fast = || {
            timed(|| {
                for _ in 0..reps {
                    black_box(discretizer::fast_project(black_box(&s0), black_box(&table)));
                }
            })
            .1
        };
        let (opt, fast) = if k % 2 == 0 {
            let a = time_opt();
            (a, time_fast())
        } else {
            let b = time_fast();
            (time_opt(), b)
        };
        if k >= opts.warmup {
            report.inputs.push(s0);
            report.opt_us.push(opt / reps as f64);
            report.fast_us.push(fast / reps as f64);
        }
        ctl.tick(m)?;
    }
    Ok(report)
}
