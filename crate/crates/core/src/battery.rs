//! Three-time-constant (TTC) equivalent-circuit battery model.
//!
//! The circuit is an OCV source `E = a + b·soc` in series with `R_s` and three
//! parallel RC branches. With the DC-bus voltage `v` and DC power `p_dc`, the
//! series drop is `v_s = p_dc·R_s / v` and
//!
//! ```text
//! v_s + vc_1 + vc_2 + vc_3 = E - v      =>      v² + (Σvc - E)·v + p_dc·R_s = 0
//! ```
//!
//! SoC convention: discharge (`p_dc > 0`) decreases SoC.

use thiserror::Error;

use crate::units::BaseQuantities;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum VdcError {
    #[error("DC-bus quadratic has no real root (discriminant {0:.3e})")]
    Discriminant(f64),
    #[error("DC-bus voltage {v:.6} pu outside [{min:.6}, {max:.6}]")]
    Bounds { v: f64, min: f64, max: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TtcParams {
    pub r_s: f64,
    pub r: [f64; 3],
    /// Branch capacitances [pu-time]; `r[k]·c[k]` is the branch time constant in seconds.
    pub c: [f64; 3],
    /// OCV intercept [pu].
    pub a: f64,
    /// OCV slope [pu per unit SoC].
    pub b: f64,
    /// `(|current| [pu], capacity [A·h])`, sorted by current.
    pub c_max_table: Vec<(f64, f64)>,
    pub soc_min: f64,
    pub soc_max: f64,
    pub v_dc_min: f64,
    pub v_dc_max: f64,
}

impl Default for TtcParams {
    fn default() -> Self {
        Self {
            r_s: 0.04,
            r: [0.01, 0.01, 0.01],
            c: [10.0, 100.0, 1000.0],
            a: 0.90,
            b: 0.15,
            c_max_table: vec![(0.0, 800.0), (1.2, 780.0)],
            soc_min: 0.1,
            soc_max: 0.9,
            v_dc_min: 600.0 / 700.0,
            v_dc_max: 800.0 / 700.0,
        }
    }
}

impl TtcParams {
    /// Returns the name of the first violated invariant, if any.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        let pos = |x: f64| x.is_finite() && x > 0.0;
        if !pos(self.r_s) || self.r_s >= 0.045 {
            return Err(("rs_pu", format!("must be in (0, 0.045), got {}", self.r_s)));
        }
        for (k, name) in ["r1_pu", "r2_pu", "r3_pu"].into_iter().enumerate() {
            if !pos(self.r[k]) {
                return Err((name, format!("must be positive, got {}", self.r[k])));
            }
        }
        for (k, name) in ["c1_pu", "c2_pu", "c3_pu"].into_iter().enumerate() {
            if !pos(self.c[k]) {
                return Err((name, format!("must be positive, got {}", self.c[k])));
            }
        }
        if !(0.0..1.0).contains(&self.soc_min) || !(self.soc_min < self.soc_max && self.soc_max <= 1.0) {
            return Err(("soc_max", format!("need 0 <= soc_min < soc_max <= 1, got [{}, {}]", self.soc_min, self.soc_max)));
        }
        if !(pos(self.v_dc_min) && self.v_dc_min < self.v_dc_max && self.v_dc_max.is_finite()) {
            return Err(("vdc_max_pu", format!("need 0 < vdc_min < vdc_max, got [{}, {}]", self.v_dc_min, self.v_dc_max)));
        }
        if self.c_max_table.len() < 2 {
            return Err(("cmax_table", "needs at least two entries".into()));
        }
        for w in self.c_max_table.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(("cmax_table", "currents must be strictly increasing".into()));
            }
        }
        if self.c_max_table.iter().any(|&(i, c)| !(i.is_finite() && pos(c))) {
            return Err(("cmax_table", "capacities must be positive".into()));
        }
        Ok(())
    }

    pub fn tau(&self, k: usize) -> f64 {
        self.r[k] * self.c[k]
    }

    pub fn min_capacity(&self) -> f64 {
        self.c_max_table.iter().map(|&(_, c)| c).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryState {
    pub soc: f64,
    pub vc: [f64; 3],
    pub v_dc: f64,
    /// DC current of the previous loop [pu].
    pub i_prev: f64,
}

impl BatteryState {
    /// Relaxed battery (capacitors discharged) at the open-circuit voltage.
    pub fn at_rest(soc: f64, params: &TtcParams) -> Self {
        Self { soc, vc: [0.0; 3], v_dc: ocv(soc, params), i_prev: 0.0 }
    }

    pub fn vc_sum(&self) -> f64 {
        self.vc.iter().sum()
    }
}

pub fn ocv(soc: f64, params: &TtcParams) -> f64 {
    params.a + params.b * soc
}

/// Piecewise-linear capacity lookup on `|i|`, clamped to the end values.
pub fn c_max_lookup(i: f64, params: &TtcParams) -> f64 {
    let x = i.abs();
    let table = &params.c_max_table;
    let first = table[0];
    let last = table[table.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let k = table.partition_point(|&(ik, _)| ik <= x);
    let (i0, c0) = table[k - 1];
    let (i1, c1) = table[k];
    c0 + (c1 - c0) * (x - i0) / (i1 - i0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EfficiencyBranch {
    /// `p_dc = eta·p_ac`
    Charge,
    /// `p_dc = p_ac / eta`
    Discharge,
}

impl EfficiencyBranch {
    /// Branch implied by the sign of an active power; zero is treated as discharge.
    pub fn of(p_ac: f64) -> Self {
        if p_ac < 0.0 {
            Self::Charge
        } else {
            Self::Discharge
        }
    }

    /// Slope of the linear map `p_ac -> p_dc`.
    pub fn gain(self, eta: f64) -> f64 {
        match self {
            Self::Charge => eta,
            Self::Discharge => 1.0 / eta,
        }
    }
}

/// AC-to-DC active power with the branch fixed by the initial setpoint's sign.
pub fn p_dc_of_p_ac(p_ac: f64, p_ac0: f64, eta: f64) -> f64 {
    match EfficiencyBranch::of(p_ac0) {
        EfficiencyBranch::Charge => eta * p_ac,
        EfficiencyBranch::Discharge => p_ac / eta,
    }
}

/// Exact RC-branch update over `dt` seconds with the series current
/// `p_dc / v_dc` held constant across the step.
pub fn update_vc(vc: [f64; 3], p_dc: f64, v_dc: f64, params: &TtcParams, dt: f64) -> [f64; 3] {
    let i_s = p_dc / v_dc;
    let mut out = [0.0; 3];
    for k in 0..3 {
        let decay = (-dt / params.tau(k)).exp();
        out[k] = vc[k] * decay + params.r[k] * i_s * (1.0 - decay);
    }
    out
}

/// Larger root of `v² + (Σvc − E)·v + p_dc·R_s = 0`, without bound checks.
pub fn upper_root(vc_sum: f64, e: f64, p_dc: f64, r_s: f64) -> Result<f64, VdcError> {
    let c = e - vc_sum;
    let disc = c * c - 4.0 * p_dc * r_s;
    if disc < 0.0 {
        return Err(VdcError::Discriminant(disc));
    }
    let sq = disc.sqrt();
    // v⁺·v⁻ = p_dc·R_s; take whichever form avoids cancellation.
    Ok(if c >= 0.0 { 0.5 * (c + sq) } else { 2.0 * p_dc * r_s / (c - sq) })
}

/// DC-bus voltage consistent with the TTC state and DC power.
pub fn solve_vdc(vc: &[f64; 3], soc: f64, p_dc: f64, params: &TtcParams) -> Result<f64, VdcError> {
    let v = upper_root(vc.iter().sum(), ocv(soc, params), p_dc, params.r_s)?;
    if v < params.v_dc_min || v > params.v_dc_max {
        return Err(VdcError::Bounds { v, min: params.v_dc_min, max: params.v_dc_max });
    }
    Ok(v)
}

/// Residual of the DC-bus quadratic at `v`.
pub fn vdc_residual(v: f64, vc_sum: f64, e: f64, p_dc: f64, r_s: f64) -> f64 {
    v * v + (vc_sum - e) * v + p_dc * r_s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SocUpdate {
    /// New SoC, clamped to [0, 1].
    pub soc: f64,
    /// Raw (unclamped) result.
    pub raw: f64,
    /// Set when the raw value left [0, 1].
    pub out_of_band: bool,
}

pub fn soc_step(
    soc: f64,
    p_dc: f64,
    v_dc: f64,
    dt: f64,
    params: &TtcParams,
    base: &BaseQuantities,
) -> SocUpdate {
    let i_pu = p_dc / v_dc;
    let amps = i_pu * base.i_base();
    let raw = soc - amps * (dt / 3600.0) / c_max_lookup(i_pu, params);
    let out_of_band = !(0.0..=1.0).contains(&raw);
    SocUpdate { soc: raw.clamp(0.0, 1.0), raw, out_of_band }
}

/// DC power range [pu] that keeps SoC within its security range for one tick
/// at constant power.
///
/// The bounds assume the worst case over the tick: the DC bus sitting at
/// `v_dc_min` (largest current per unit power) and the smallest tabulated
/// capacity, so the guarantee holds however the bus voltage and current
/// evolve inside the tick.
pub fn soc_power_bounds(state: &BatteryState, params: &TtcParams, tick: f64, base: &BaseQuantities) -> (f64, f64) {
    let capacity = c_max_lookup(state.i_prev, params).min(params.min_capacity());
    let v = state.v_dc.min(params.v_dc_min);
    let factor = capacity * v / (base.i_base() * tick / 3600.0);
    let p_max = ((state.soc - params.soc_min) * factor).max(0.0);
    let p_min = (-(params.soc_max - state.soc) * factor).min(0.0);
    (p_min, p_max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub state: BatteryState,
    pub soc_out_of_band: bool,
}

/// Advances the plant by `dt` under constant DC power.
pub fn step(
    state: &BatteryState,
    p_dc: f64,
    dt: f64,
    params: &TtcParams,
    base: &BaseQuantities,
) -> Result<StepOutcome, VdcError> {
    let v = solve_vdc(&state.vc, state.soc, p_dc, params)?;
    let soc = soc_step(state.soc, p_dc, v, dt, params, base);
    let vc = update_vc(state.vc, p_dc, v, params, dt);
    Ok(StepOutcome {
        state: BatteryState { soc: soc.soc, vc, v_dc: v, i_prev: p_dc / v },
        soc_out_of_band: soc.out_of_band,
    })
}
