//! WebAssembly bindings for the browser demo in `www/`.
//!
//! All quantities are per unit. The demo uses the built-in configuration and
//! capability curves.

use wasm_bindgen::prelude::*;

use bess_core::battery::BatteryState;
use bess_core::capability::CapabilityCurveSet;
use bess_core::config::Config;
use bess_core::discretizer::{self, StaticContext};
use bess_core::harness::{self, Method, OuParams};
use bess_core::optimizer::{self, ProjectionProblem};
use bess_core::Setpoint;

fn operating_point(cfg: &Config, vdc: f64, soc: f64) -> Result<BatteryState, JsError> {
    if !(0.0..=1.0).contains(&soc) {
        return Err(JsError::new("soc must lie in [0, 1]"));
    }
    if !(vdc > 0.0) {
        return Err(JsError::new("vdc must be positive"));
    }
    Ok(BatteryState { v_dc: vdc, ..BatteryState::at_rest(soc, &cfg.battery) })
}

fn context(vac: f64, vdc: f64, soc: f64) -> Result<StaticContext, JsError> {
    let cfg = Config::default();
    let state = operating_point(&cfg, vdc, soc)?;
    Ok(StaticContext::measured(&CapabilityCurveSet::default_set(), vac, &state, &cfg.battery, &cfg.control, &cfg.base))
}

/// Per-sector maximum radii; entry `k` belongs to angle `(k + 1)·resolution`.
#[wasm_bindgen]
pub fn ray_table(vac: f64, vdc: f64, soc: f64, resolution_deg: f64) -> Result<Vec<f64>, JsError> {
    let table = discretizer::build_table(&context(vac, vdc, soc)?, resolution_deg).map_err(|e| JsError::new(&e.to_string()))?;
    Ok(table.smax)
}

/// Projects `(p0, q0)`; returns `[p, q]`. `method` is `"opt"` or `"fast"`.
#[wasm_bindgen]
pub fn project(p0: f64, q0: f64, vac: f64, vdc: f64, soc: f64, method: &str) -> Result<Vec<f64>, JsError> {
    let s0 = Setpoint::new(p0, q0);
    match method {
        "opt" => {
            let cfg = Config::default();
            let curves = CapabilityCurveSet::default_set();
            let state = operating_point(&cfg, vdc, soc)?;
            let curve = curves.select_curve(vac, vdc);
            let prob = ProjectionProblem::from_state(s0, curve, &state, &cfg.battery, &cfg.control, &cfg.base);
            let r = optimizer::solve(&prob).map_err(|e| JsError::new(&e.to_string()))?;
            Ok(vec![r.s.p, r.s.q])
        }
        "fast" => {
            let table = discretizer::build_table(&context(vac, vdc, soc)?, 1.0).map_err(|e| JsError::new(&e.to_string()))?;
            let s = discretizer::fast_project(&s0, &table);
            Ok(vec![s.p, s.q])
        }
        other => Err(JsError::new(&format!("unknown method `{other}`"))),
    }
}

/// Closed-loop run over a synthetic trace.
#[wasm_bindgen]
pub struct Run {
    t: Vec<f64>,
    p0: Vec<f64>,
    p: Vec<f64>,
    soc: Vec<f64>,
    metrics: Vec<f64>,
}

#[wasm_bindgen]
impl Run {
    pub fn t(&self) -> Vec<f64> {
        self.t.clone()
    }

    pub fn p0(&self) -> Vec<f64> {
        self.p0.clone()
    }

    pub fn p(&self) -> Vec<f64> {
        self.p.clone()
    }

    pub fn soc(&self) -> Vec<f64> {
        self.soc.clone()
    }

    /// `[tde, tce, tse]` in kWh.
    pub fn metrics(&self) -> Vec<f64> {
        self.metrics.clone()
    }
}

/// `alpha` is the frequency droop in MW/Hz (negative: under-frequency discharges),
/// `method` one of `"opt"`, `"fast"`, `"baseline"`.
#[wasm_bindgen]
pub fn simulate(seed: u64, duration_s: f64, alpha: f64, method: &str) -> Result<Run, JsError> {
    let method: Method = method.parse().map_err(|e: String| JsError::new(&e))?;
    let mut cfg = Config::default();
    cfg.droop.alpha = alpha;
    let trace = harness::gen_trace(seed, duration_s, &OuParams::default()).map_err(|e| JsError::new(&e.to_string()))?;
    let out = harness::simulate(&trace, method, &cfg, &CapabilityCurveSet::default_set()).map_err(|e| JsError::new(&e.to_string()))?;
    let col = |f: fn(&harness::TickRecord) -> f64| out.log.iter().map(f).collect();
    Ok(Run {
        t: col(|r| r.t),
        p0: col(|r| r.p0),
        p: col(|r| r.p),
        soc: col(|r| r.soc),
        metrics: vec![out.metrics.tde, out.metrics.tce, out.metrics.tse],
    })
}
