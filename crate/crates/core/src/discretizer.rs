//! Per-degree maximum-radius table of the static feasible region and the
//! table-lookup projection that runs in the control loop.
//!
//! With the DC-bus voltage and SoC frozen at their measured values, the
//! feasible region reduces to the capability curve cut by the SoC power
//! window. Along each ray from the origin the feasible radii form an interval
//! `[0, r_max]` (the region is convex and contains the origin), so `r_max` is
//! found by bisection.

use std::fmt::Write as _;

use thiserror::Error;

use crate::battery::{self, BatteryState, EfficiencyBranch, TtcParams};
use crate::capability::{CapabilityCurve, CapabilityCurveSet};
use crate::units::{BaseQuantities, ControlParams, Setpoint};

pub const BISECTION_STEPS: usize = 60;
pub const RADIUS_CEILING: f64 = 2.0;
/// SoC distance to a limit under which tables are rebuilt every tick.
pub const SOC_REBUILD_MARGIN: f64 = 0.02;

/// Everything the static region depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticContext {
    pub curve: CapabilityCurve,
    pub p_dc_bounds: (f64, f64),
    pub eta: f64,
    pub v_ac: f64,
    pub v_dc: f64,
    pub soc: f64,
}

impl StaticContext {
    /// Context for measured voltages and SoC, with the SoC window of one tick.
    pub fn measured(
        curves: &CapabilityCurveSet,
        v_ac: f64,
        state: &BatteryState,
        params: &TtcParams,
        control: &ControlParams,
        base: &BaseQuantities,
    ) -> Self {
        Self {
            curve: curves.select_curve(v_ac, state.v_dc).clone(),
            p_dc_bounds: battery::soc_power_bounds(state, params, control.tick, base),
            eta: control.eta,
            v_ac,
            v_dc: state.v_dc,
            soc: state.soc,
        }
    }

    pub fn admits(&self, s: &Setpoint) -> bool {
        if !self.curve.contains(s) {
            return false;
        }
        let p_dc = EfficiencyBranch::of(s.p).gain(self.eta) * s.p;
        p_dc >= self.p_dc_bounds.0 && p_dc <= self.p_dc_bounds.1
    }
}

/// Unit vector at `deg` degrees, exact on the axes.
pub fn direction(deg: f64) -> (f64, f64) {
    let d = deg.rem_euclid(360.0);
    match d {
        x if x == 0.0 => (1.0, 0.0),
        x if x == 90.0 => (0.0, 1.0),
        x if x == 180.0 => (-1.0, 0.0),
        x if x == 270.0 => (0.0, -1.0),
        _ => {
            let r = d.to_radians();
            (r.cos(), r.sin())
        }
    }
}

/// Largest feasible radius along the ray at `theta_deg`.
pub fn ray_max(theta_deg: f64, ctx: &StaticContext) -> f64 {
    let (c, s) = direction(theta_deg);
    let at = |r: f64| Setpoint::new(r * c, r * s);
    if ctx.admits(&at(RADIUS_CEILING)) {
        return RADIUS_CEILING;
    }
    let (mut lo, mut hi) = (0.0, RADIUS_CEILING);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if ctx.admits(&at(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableContext {
    pub v_ac: f64,
    pub v_dc: f64,
    pub soc: f64,
    /// Key of the curve the table was built from.
    pub curve_key: (f64, f64),
    /// SHA-256 of the curve file, when built from one.
    pub curves_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RayTable {
    pub resolution_deg: f64,
    /// `smax[k - 1]` is the radius at `k·resolution_deg`, `k = 1..=n`.
    pub smax: Vec<f64>,
    pub context: TableContext,
}

#[derive(Debug, Error, PartialEq)]
pub enum TableError {
    #[error("resolution {0} deg must divide 360 into a whole number of sectors")]
    Resolution(f64),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

fn sectors(resolution_deg: f64) -> Result<usize, TableError> {
    let n = 360.0 / resolution_deg;
    if !(resolution_deg > 0.0) || (n - n.round()).abs() > 1e-9 || n.round() < 4.0 {
        return Err(TableError::Resolution(resolution_deg));
    }
    Ok(n.round() as usize)
}

pub fn build_table(ctx: &StaticContext, resolution_deg: f64) -> Result<RayTable, TableError> {
    let n = sectors(resolution_deg)?;
    let smax = (1..=n).map(|k| ray_max(k as f64 * resolution_deg, ctx)).collect();
    Ok(RayTable {
        resolution_deg,
        smax,
        context: TableContext {
            v_ac: ctx.v_ac,
            v_dc: ctx.v_dc,
            soc: ctx.soc,
            curve_key: (ctx.curve.v_ac_key, ctx.curve.v_dc_key),
            curves_hash: None,
        },
    })
}

/// Sector index `k` in `1..=n` whose angle `k·resolution` is the ceiling of
/// the request's polar angle in (0°, 360°].
pub fn angle_index(s0: &Setpoint, resolution_deg: f64, n: usize) -> usize {
    let theta = if s0.p == 0.0 {
        if s0.q >= 0.0 {
            90.0
        } else {
            270.0
        }
    } else {
        let a = s0.q.atan2(s0.p).to_degrees();
        if a <= 0.0 {
            a + 360.0
        } else {
            a
        }
    };
    let x = theta / resolution_deg;
    let nearest = x.round();
    // angles that are whole sectors up to rounding stay on their sector
    let k = if (x - nearest).abs() < 1e-9 { nearest } else { x.ceil() } as usize;
    match k {
        0 => n,
        k if k > n => n,
        k => k,
    }
}

/// Integer-degree polar angle of a request.
pub fn angle_deg(s0: &Setpoint) -> u32 {
    angle_index(s0, 1.0, 360) as u32
}

/// Radial clip onto the table bound at the request's ceiled sector angle.
pub fn fast_project(s0: &Setpoint, table: &RayTable) -> Setpoint {
    if s0.is_zero() {
        return *s0;
    }
    let n = table.smax.len();
    let k = angle_index(s0, table.resolution_deg, n);
    let r = table.smax[k - 1];
    if s0.norm() <= r {
        return *s0;
    }
    let (c, s) = direction(k as f64 * table.resolution_deg);
    Setpoint::new(r * c, r * s)
}

impl RayTable {
    pub fn sectors(&self) -> usize {
        self.smax.len()
    }

    /// Whether a table built for this context is stale for the given
    /// measurements: a different curve would be selected, or SoC is close
    /// enough to a limit that the SoC window may bind.
    pub fn needs_rebuild(&self, curves: &CapabilityCurveSet, v_ac: f64, v_dc: f64, soc: f64, params: &TtcParams) -> bool {
        let c = curves.select_curve(v_ac, v_dc);
        if (c.v_ac_key, c.v_dc_key) != self.context.curve_key {
            return true;
        }
        soc - params.soc_min < SOC_REBUILD_MARGIN || params.soc_max - soc < SOC_REBUILD_MARGIN
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let c = &self.context;
        let _ = writeln!(
            out,
            "# vac_pu={},vdc_pu={},soc={},resolution_deg={},curve_vac_pu={},curve_vdc_pu={},curves_sha256={}",
            c.v_ac,
            c.v_dc,
            c.soc,
            self.resolution_deg,
            c.curve_key.0,
            c.curve_key.1,
            c.curves_hash.as_deref().unwrap_or("-")
        );
        out.push_str("deg,smax_pu\n");
        for (k, r) in self.smax.iter().enumerate() {
            let _ = writeln!(out, "{},{}", (k + 1) as f64 * self.resolution_deg, r);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, TableError> {
        let err = |line: usize, msg: String| TableError::Parse { line, msg };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty table file".into()))?;
        let header = header.strip_prefix('#').ok_or_else(|| err(1, "missing context comment".into()))?;
        let mut field = std::collections::HashMap::new();
        for kv in header.trim().split(',') {
            let (k, v) = kv.split_once('=').ok_or_else(|| err(1, format!("bad context field `{kv}`")))?;
            field.insert(k.trim().to_string(), v.trim().to_string());
        }
        let num = |k: &str| -> Result<f64, TableError> {
            field
                .get(k)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| err(1, format!("missing or bad context field `{k}`")))
        };
        let resolution_deg = num("resolution_deg")?;
        let n = sectors(resolution_deg)?;
        let context = TableContext {
            v_ac: num("vac_pu")?,
            v_dc: num("vdc_pu")?,
            soc: num("soc")?,
            curve_key: (num("curve_vac_pu")?, num("curve_vdc_pu")?),
            curves_hash: field.get("curves_sha256").filter(|h| h.as_str() != "-").cloned(),
        };
        match lines.next() {
            Some((_, "deg,smax_pu")) => {}
            _ => return Err(err(2, "expected `deg,smax_pu` header".into())),
        }
        let mut smax = Vec::with_capacity(n);
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let (_, r) = line.split_once(',').ok_or_else(|| err(idx + 1, "expected `deg,smax_pu`".into()))?;
            let r: f64 = r.trim().parse().map_err(|_| err(idx + 1, format!("bad radius `{r}`")))?;
            if !(r.is_finite() && r >= 0.0) {
                return Err(err(idx + 1, format!("radius must be finite and non-negative, got {r}")));
            }
            smax.push(r);
        }
        if smax.len() != n {
            return Err(err(0, format!("expected {n} rows, found {}", smax.len())));
        }
        Ok(Self { resolution_deg, smax, context })
    }
}
