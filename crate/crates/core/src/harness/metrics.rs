//! Per-tick log records and the energy metrics computed from them.

use std::fmt::Write as _;
use std::str::FromStr;

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TickStatus {
    /// Initial setpoint applied unchanged.
    Passthrough,
    /// Initial setpoint replaced by a feasible one.
    Projected,
    /// Infeasible initial setpoint reset to zero by converter protection.
    Zeroed,
    /// No feasible setpoint existed; zero applied.
    Infeasible,
    /// Projection did not converge; zero applied.
    Diverged,
    /// The plant rejected the setpoint mid-tick; zero applied.
    BatteryError,
}

impl TickStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TickStatus::Passthrough => "passthrough",
            TickStatus::Projected => "projected",
            TickStatus::Zeroed => "zeroed",
            TickStatus::Infeasible => "infeasible",
            TickStatus::Diverged => "diverged",
            TickStatus::BatteryError => "battery_error",
        }
    }

    /// Whether the tick ran to completion as commanded.
    pub fn is_nominal(self) -> bool {
        matches!(self, TickStatus::Passthrough | TickStatus::Projected | TickStatus::Zeroed)
    }
}

impl FromStr for TickStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "passthrough" => TickStatus::Passthrough,
            "projected" => TickStatus::Projected,
            "zeroed" => TickStatus::Zeroed,
            "infeasible" => TickStatus::Infeasible,
            "diverged" => TickStatus::Diverged,
            "battery_error" => TickStatus::BatteryError,
            other => return Err(format!("unknown status `{other}`")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickRecord {
    pub t: f64,
    pub f: f64,
    pub v_ac: f64,
    pub p0: f64,
    pub q0: f64,
    /// Applied setpoint [pu].
    pub p: f64,
    pub q: f64,
    /// DC-bus voltage and SoC at the end of the tick.
    pub v_dc: f64,
    pub soc: f64,
    pub initial_feasible: bool,
    pub latency_us: f64,
    pub status: TickStatus,
}

pub const LOG_HEADER: &str = "t_s,f_hz,vac_pu,p0_pu,q0_pu,p_pu,q_pu,vdc_pu,soc,initial_feasible,latency_us,status";

pub fn log_to_csv(log: &[TickRecord]) -> String {
    let mut out = String::with_capacity(log.len() * 120);
    out.push_str(LOG_HEADER);
    out.push('\n');
    for r in log {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            r.f,
            r.v_ac,
            r.p0,
            r.q0,
            r.p,
            r.q,
            r.v_dc,
            r.soc,
            r.initial_feasible as u8,
            r.latency_us,
            r.status.as_str()
        );
    }
    out
}

pub fn log_from_csv(text: &str) -> Result<Vec<TickRecord>, HarnessError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == LOG_HEADER => {}
        _ => return Err(HarnessError::Parse { line: 1, msg: format!("expected header `{LOG_HEADER}`") }),
    }
    let mut log = Vec::new();
    for (idx, line) in lines {
        let bad = |msg: String| HarnessError::Parse { line: idx + 1, msg };
        let c: Vec<&str> = line.split(',').map(str::trim).collect();
        if c.len() != 12 {
            return Err(bad(format!("expected 12 columns, found {}", c.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number `{s}`")));
        let initial_feasible = match c[9] {
            "1" => true,
            "0" => false,
            other => return Err(bad(format!("initial_feasible must be 0 or 1, got `{other}`"))),
        };
        log.push(TickRecord {
            t: num(c[0])?,
            f: num(c[1])?,
            v_ac: num(c[2])?,
            p0: num(c[3])?,
            q0: num(c[4])?,
            p: num(c[5])?,
            q: num(c[6])?,
            v_dc: num(c[7])?,
            soc: num(c[8])?,
            initial_feasible,
            latency_us: num(c[10])?,
            status: c[11].parse().map_err(bad)?,
        });
    }
    Ok(log)
}

/// Discharged, charged and sustained energy [kWh].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyMetrics {
    pub tde: f64,
    pub tce: f64,
    pub tse: f64,
}

impl EnergyMetrics {
    /// Sums applied active power over the log. `tick` is the control period
    /// [s] and `s_base` the power base [VA].
    pub fn from_log(log: &[TickRecord], tick: f64, s_base: f64) -> Self {
        let kwh = s_base * tick / 3.6e6;
        let mut m = Self::default();
        for r in log {
            if r.p > 0.0 {
                m.tde += r.p * kwh;
            } else if r.p < 0.0 {
                m.tce += -r.p * kwh;
            }
            if !r.initial_feasible {
                m.tse += r.p.abs() * kwh;
            }
        }
        m
    }

    pub fn to_csv(&self) -> String {
        format!("tde_kwh,tce_kwh,tse_kwh\n{},{},{}\n", self.tde, self.tce, self.tse)
    }

    pub fn from_csv(text: &str) -> Result<Self, HarnessError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some("tde_kwh,tce_kwh,tse_kwh") {
            return Err(HarnessError::Parse { line: 1, msg: "expected header `tde_kwh,tce_kwh,tse_kwh`".into() });
        }
        let bad = |msg: String| HarnessError::Parse { line: 2, msg };
        let row = lines.next().ok_or_else(|| bad("missing values row".into()))?;
        let v: Vec<f64> = row
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad(format!("bad number `{}`", s.trim()))))
            .collect::<Result<_, _>>()?;
        match v[..] {
            [tde, tce, tse] => Ok(Self { tde, tce, tse }),
            _ => Err(bad(format!("expected 3 values, found {}", v.len()))),
        }
    }
}
