//! Closed-loop simulation: grid trace, droop, projection, battery plant.
//!
//! Each control tick maps one grid sample onto an initial setpoint, projects
//! it with the selected method and applies the result to the battery model in
//! `delta_t` substeps. Plant and controller share the same battery model.

pub mod bench;
pub mod metrics;
pub mod trace;

use std::str::FromStr;

use thiserror::Error;

use crate::battery::{self, BatteryState, VdcError};
use crate::capability::CapabilityCurveSet;
use crate::config::Config;
use crate::discretizer::{self, RayTable, StaticContext, TableError};
use crate::droop;
use crate::optimizer::{self, ProjectionProblem, ProjectionStatus, SolveError, FEAS_TOL};
use crate::units::{GridMeasurement, Setpoint};

pub use metrics::{EnergyMetrics, TickRecord, TickStatus};
pub use trace::{gen_trace, OuParams, Trace, TraceError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Table(#[from] TableError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Optimizer,
    Fast,
    Baseline,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Optimizer => "opt",
            Method::Fast => "fast",
            Method::Baseline => "baseline",
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "opt" | "optimizer" => Ok(Method::Optimizer),
            "fast" => Ok(Method::Fast),
            "baseline" => Ok(Method::Baseline),
            other => Err(format!("unknown method `{other}` (expected opt, fast or baseline)")),
        }
    }
}

#[cfg(not(target_arch = "wasm32"))]
pub(crate) fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = std::time::Instant::now();
    let v = f();
    (v, start.elapsed().as_secs_f64() * 1e6)
}

#[cfg(target_arch = "wasm32")]
pub(crate) fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    (f(), 0.0)
}

/// Applies a setpoint for one control tick.
pub fn apply(state: &BatteryState, s: &Setpoint, config: &Config) -> Result<BatteryState, VdcError> {
    let c = &config.control;
    let p_dc = battery::p_dc_of_p_ac(s.p, s.p, c.eta);
    let mut st = *state;
    for _ in 0..c.substeps() {
        st = battery::step(&st, p_dc, c.delta_t, &config.battery, &config.base)?.state;
    }
    Ok(st)
}

/// One controller plus plant, advanced tick by tick.
pub struct Controller<'a> {
    pub config: &'a Config,
    pub curves: &'a CapabilityCurveSet,
    pub method: Method,
    pub state: BatteryState,
    pub resolution_deg: f64,
    table: Option<RayTable>,
    /// Number of ray tables built so far.
    pub table_builds: usize,
}

impl<'a> Controller<'a> {
    pub fn new(config: &'a Config, curves: &'a CapabilityCurveSet, method: Method) -> Self {
        Self {
            config,
            curves,
            method,
            state: BatteryState::at_rest(config.soc0, &config.battery),
            resolution_deg: 1.0,
            table: None,
            table_builds: 0,
        }
    }

    /// Starts from a prebuilt table; it is still replaced once stale.
    pub fn with_table(mut self, table: RayTable) -> Self {
        self.resolution_deg = table.resolution_deg;
        self.table = Some(table);
        self
    }

    pub fn with_resolution(mut self, resolution_deg: f64) -> Self {
        self.resolution_deg = resolution_deg;
        self
    }

    pub fn problem(&self, s0: Setpoint, v_ac: f64) -> ProjectionProblem<'a> {
        let c = self.config;
        let curve = self.curves.select_curve(v_ac, self.state.v_dc);
        ProjectionProblem::from_state(s0, curve, &self.state, &c.battery, &c.control, &c.base)
    }

    /// Ray table valid for the current measurements, rebuilt when stale.
    pub fn current_table(&mut self, v_ac: f64) -> Result<&RayTable, TableError> {
        let c = self.config;
        let stale = match &self.table {
            Some(t) => t.needs_rebuild(self.curves, v_ac, self.state.v_dc, self.state.soc, &c.battery),
            None => true,
        };
        if stale {
            let ctx = StaticContext::measured(self.curves, v_ac, &self.state, &c.battery, &c.control, &c.base);
            self.table = Some(discretizer::build_table(&ctx, self.resolution_deg)?);
            self.table_builds += 1;
        }
        Ok(self.table.as_ref().expect("table present"))
    }

    pub fn tick(&mut self, m: &GridMeasurement) -> Result<TickRecord, TableError> {
        let c = self.config;
        let s0 = droop::initial_setpoint(m, &c.droop, &c.base);
        let prob = self.problem(s0, m.v_ac);
        let initial_feasible = prob.is_feasible(&s0, FEAS_TOL);

        let ((s, status), latency_us) = match self.method {
            Method::Optimizer => timed(|| match optimizer::solve(&prob) {
                Ok(r) if r.status == ProjectionStatus::Passthrough => (r.s, TickStatus::Passthrough),
                Ok(r) => (r.s, TickStatus::Projected),
                Err(SolveError::Infeasible) => (Setpoint::ZERO, TickStatus::Infeasible),
                Err(SolveError::Diverged(_)) => (Setpoint::ZERO, TickStatus::Diverged),
            }),
            Method::Fast => {
                let (out, us) = timed(|| self.current_table(m.v_ac).map(|t| discretizer::fast_project(&s0, t)));
                let out = out?;
                let status = if out == s0 { TickStatus::Passthrough } else { TickStatus::Projected };
                ((out, status), us)
            }
            Method::Baseline => timed(|| {
                if initial_feasible {
                    (s0, TickStatus::Passthrough)
                } else {
                    (Setpoint::ZERO, TickStatus::Zeroed)
                }
            }),
        };

        let (s, status) = match apply(&self.state, &s, c) {
            Ok(next) => {
                self.state = next;
                (s, status)
            }
            Err(_) => {
                if let Ok(next) = apply(&self.state, &Setpoint::ZERO, c) {
                    self.state = next;
                }
                (Setpoint::ZERO, TickStatus::BatteryError)
            }
        };

        Ok(TickRecord {
            t: m.t,
            f: m.f,
            v_ac: m.v_ac,
            p0: s0.p,
            q0: s0.q,
            p: s.p,
            q: s.q,
            v_dc: self.state.v_dc,
            soc: self.state.soc,
            initial_feasible,
            latency_us,
            status,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub log: Vec<TickRecord>,
    pub metrics: EnergyMetrics,
    pub table_builds: usize,
}

pub fn simulate(trace: &Trace, method: Method, config: &Config, curves: &CapabilityCurveSet) -> Result<SimOutput, TableError> {
    run(Controller::new(config, curves, method), trace)
}

/// Runs a prepared controller over a trace.
pub fn run(mut ctl: Controller, trace: &Trace) -> Result<SimOutput, TableError> {
    let log = trace.samples.iter().map(|m| ctl.tick(m)).collect::<Result<Vec<_>, _>>()?;
    let metrics = EnergyMetrics::from_log(&log, ctl.config.control.tick, ctl.config.base.s_base);
    Ok(SimOutput { log, metrics, table_builds: ctl.table_builds })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace_of(samples: &[(f64, f64)]) -> Trace {
        Trace {
            dt: 0.1,
            samples: samples
                .iter()
                .enumerate()
                .map(|(k, &(f, v_ac))| GridMeasurement { t: k as f64 * 0.1, f, v_ac })
                .collect(),
        }
    }

    #[test]
    fn quiet_grid_does_nothing() {
        let cfg = Config::default();
        let curves = CapabilityCurveSet::default_set();
        let out = simulate(&trace_of(&[(50.0, 1.0); 50]), Method::Optimizer, &cfg, &curves).unwrap();
        assert_eq!(out.metrics, EnergyMetrics::default());
        assert!(out.log.iter().all(|r| r.p == 0.0 && r.status == TickStatus::Passthrough && r.soc == cfg.soc0));
    }

    #[test]
    fn overload_is_sustained_or_zeroed() {
        let cfg = Config::default();
        let curves = CapabilityCurveSet::default_set();
        // 0.2 Hz low frequency asks for 1.6 MW of discharge
        let trace = trace_of(&[(49.8, 1.0); 20]);
        for method in [Method::Optimizer, Method::Fast] {
            let out = simulate(&trace, method, &cfg, &curves).unwrap();
            assert!(out.log.iter().all(|r| !r.initial_feasible && r.p > 0.9 && r.p <= 0.95 + 1e-9), "{method:?}");
            assert!(out.metrics.tse > 0.0 && out.metrics.tse == out.metrics.tde);
        }
        let base = simulate(&trace, Method::Baseline, &cfg, &curves).unwrap();
        assert!(base.log.iter().all(|r| r.p == 0.0 && r.status == TickStatus::Zeroed));
        assert_eq!(base.metrics.tse, 0.0);
    }

    #[test]
    fn soc_limit_is_respected() {
        let mut cfg = Config::default();
        cfg.soc0 = cfg.battery.soc_min + 2e-5;
        let curves = CapabilityCurveSet::default_set();
        let trace = trace_of(&[(49.95, 1.0); 40]);
        for method in [Method::Optimizer, Method::Fast] {
            let out = simulate(&trace, method, &cfg, &curves).unwrap();
            let lo = out.log.iter().map(|r| r.soc).fold(f64::INFINITY, f64::min);
            assert!(lo >= cfg.battery.soc_min - 1e-9, "{method:?} {lo}");
            assert!(out.log.iter().all(|r| r.status.is_nominal()));
            assert!(out.log.last().unwrap().p < 1e-3);
        }
    }

    #[test]
    fn method_names() {
        assert_eq!("opt".parse::<Method>().unwrap(), Method::Optimizer);
        assert_eq!("baseline".parse::<Method>().unwrap(), Method::Baseline);
        assert!("slow".parse::<Method>().is_err());
    }
}
