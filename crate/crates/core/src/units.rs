//! Shared domain types and per-unit conversion.
//!
//! Everything inside the crate works in per-unit. SI values only appear at
//! file and CLI boundaries, converted through [`to_pu`] / [`from_pu`].

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum UnitError {
    #[error("unknown quantity kind `{0}` (expected power, dc_voltage, ac_voltage or current)")]
    UnknownKind(String),
    #[error("base quantity `{0}` must be strictly positive, got {1}")]
    NonPositiveBase(&'static str, f64),
}

/// Base values used to normalize SI quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseQuantities {
    /// Apparent power base [VA].
    pub s_base: f64,
    /// DC voltage base [V].
    pub v_dc_base: f64,
    /// AC line voltage base [V].
    pub v_ac_base: f64,
    /// Nominal frequency [Hz].
    pub f_nom: f64,
}

impl BaseQuantities {
    pub fn new(s_base: f64, v_dc_base: f64, v_ac_base: f64, f_nom: f64) -> Result<Self, UnitError> {
        for (name, v) in [
            ("s_base", s_base),
            ("v_dc_base", v_dc_base),
            ("v_ac_base", v_ac_base),
            ("f_nom", f_nom),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(UnitError::NonPositiveBase(name, v));
            }
        }
        Ok(Self { s_base, v_dc_base, v_ac_base, f_nom })
    }

    /// DC current base [A], i.e. `s_base / v_dc_base`.
    pub fn i_base(&self) -> f64 {
        self.s_base / self.v_dc_base
    }

    fn base_of(&self, kind: QuantityKind) -> f64 {
        match kind {
            QuantityKind::Power => self.s_base,
            QuantityKind::DcVoltage => self.v_dc_base,
            QuantityKind::AcVoltage => self.v_ac_base,
            QuantityKind::Current => self.i_base(),
        }
    }
}

impl Default for BaseQuantities {
    /// 720 kVA, 700 V DC, 300 V AC (transformer low side), 50 Hz.
    fn default() -> Self {
        Self { s_base: 720e3, v_dc_base: 700.0, v_ac_base: 300.0, f_nom: 50.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantityKind {
    Power,
    DcVoltage,
    AcVoltage,
    Current,
}

impl FromStr for QuantityKind {
    type Err = UnitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "power" => Ok(Self::Power),
            "dc_voltage" => Ok(Self::DcVoltage),
            "ac_voltage" => Ok(Self::AcVoltage),
            "current" => Ok(Self::Current),
            other => Err(UnitError::UnknownKind(other.to_string())),
        }
    }
}

pub fn to_pu(value: f64, base: &BaseQuantities, kind: QuantityKind) -> f64 {
    value / base.base_of(kind)
}

pub fn from_pu(value: f64, base: &BaseQuantities, kind: QuantityKind) -> f64 {
    value * base.base_of(kind)
}

/// An (active, reactive) power pair in per-unit.
///
/// Positive `p` is discharge (injection into the grid), negative `p` is charge.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Setpoint {
    pub p: f64,
    pub q: f64,
}

impl Setpoint {
    pub const ZERO: Setpoint = Setpoint { p: 0.0, q: 0.0 };

    pub fn new(p: f64, q: f64) -> Self {
        Self { p, q }
    }

    pub fn norm(&self) -> f64 {
        self.p.hypot(self.q)
    }

    pub fn dist(&self, other: &Setpoint) -> f64 {
        (self.p - other.p).hypot(self.q - other.q)
    }

    pub fn dist_sq(&self, other: &Setpoint) -> f64 {
        let dp = self.p - other.p;
        let dq = self.q - other.q;
        dp * dp + dq * dq
    }

    pub fn is_zero(&self) -> bool {
        self.p == 0.0 && self.q == 0.0
    }
}

impl fmt::Display for Setpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.p, self.q)
    }
}

/// One grid sample: time [s], frequency [Hz], AC voltage magnitude [pu].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMeasurement {
    pub t: f64,
    pub f: f64,
    pub v_ac: f64,
}

impl GridMeasurement {
    pub fn is_plausible(&self) -> bool {
        self.t.is_finite() && self.f > 45.0 && self.f < 55.0 && self.v_ac > 0.5 && self.v_ac < 1.5
    }
}

/// Control-loop timing and solver weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlParams {
    /// Inner integration step [s].
    pub delta_t: f64,
    /// Control-loop period [s].
    pub tick: f64,
    /// Converter efficiency in (0, 1].
    pub eta: f64,
    /// Weight of the DC-voltage reward term in the convexified objective.
    pub xi: f64,
}

impl Default for ControlParams {
    fn default() -> Self {
        Self { delta_t: 0.05, tick: 0.1, eta: 0.95, xi: 1e-6 }
    }
}

impl ControlParams {
    /// Number of inner steps per control tick.
    pub fn substeps(&self) -> usize {
        ((self.tick / self.delta_t).round() as usize).max(1)
    }
}
