//! Droop law with dead-bands: initial power requests from frequency and voltage deviations.

use crate::units::{BaseQuantities, GridMeasurement, Setpoint};

/// Droop coefficients and dead-bands.
///
/// Coefficients are signed. The stabilizing defaults are negative: an
/// under-frequency event (f < f_nom) produces a discharge request (p > 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DroopConfig {
    /// Frequency droop [MW/Hz].
    pub alpha: f64,
    /// Voltage droop [kVar/V].
    pub beta: f64,
    /// Frequency dead-band [Hz].
    pub db_f: f64,
    /// Voltage dead-band [V].
    pub db_v: f64,
    /// Active power magnitude the droop is sized for [pu].
    pub p_max: f64,
    /// Reactive power magnitude the droop is sized for [pu].
    pub q_max: f64,
}

impl Default for DroopConfig {
    fn default() -> Self {
        Self { alpha: -8.0, beta: -8.39, db_f: 0.01, db_v: 1.0, p_max: 1.0, q_max: 1.0 }
    }
}

impl DroopConfig {
    pub fn validate(&self) -> Result<(), &'static str> {
        if !(self.alpha.is_finite() && self.beta.is_finite()) {
            return Err("droop coefficients must be finite");
        }
        if !(self.db_f >= 0.0 && self.db_v >= 0.0) {
            return Err("dead-bands must be non-negative");
        }
        if !(self.p_max > 0.0 && self.q_max > 0.0) {
            return Err("p_max and q_max must be positive");
        }
        Ok(())
    }

    /// Stabilizing coefficients sized so that the largest expected deviation
    /// maps onto `p_max` / `q_max`.
    pub fn from_limits(
        p_max: f64,
        q_max: f64,
        max_df_hz: f64,
        max_dv_v: f64,
        base: &BaseQuantities,
    ) -> Self {
        let alpha = -(p_max * base.s_base / 1e6) / max_df_hz;
        let beta = -(q_max * base.s_base / 1e3) / max_dv_v;
        Self { alpha, beta, p_max, q_max, ..Self::default() }
    }
}

/// Maps a grid sample onto the initial (unprojected) setpoint.
///
/// Deviations are measured from nominal, not from the dead-band edge, and no
/// saturation is applied.
pub fn initial_setpoint(m: &GridMeasurement, cfg: &DroopConfig, base: &BaseQuantities) -> Setpoint {
    let df = m.f - base.f_nom;
    let p = if df.abs() > cfg.db_f {
        cfg.alpha * 1e6 * df / base.s_base
    } else {
        0.0
    };
    let dv = (m.v_ac - 1.0) * base.v_ac_base;
    let q = if dv.abs() > cfg.db_v {
        cfg.beta * 1e3 * dv / base.s_base
    } else {
        0.0
    };
    Setpoint { p, q }
}
