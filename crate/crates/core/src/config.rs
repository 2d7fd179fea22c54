//! Run configuration: bases, control timing, droop and battery parameters.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::battery::TtcParams;
use crate::droop::DroopConfig;
use crate::kv::{Document, KvError, Section};
use crate::units::{BaseQuantities, ControlParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Kv(#[from] KvError),
}

impl ConfigError {
    /// Fully qualified key the error refers to, when there is one.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Kv(KvError::Missing { key }) | ConfigError::Kv(KvError::Invalid { key, .. }) => Some(key),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub base: BaseQuantities,
    pub control: ControlParams,
    pub droop: DroopConfig,
    pub battery: TtcParams,
    /// Initial state of charge for simulations.
    pub soc0: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            base: BaseQuantities::default(),
            control: ControlParams::default(),
            droop: DroopConfig::default(),
            battery: TtcParams::default(),
            soc0: 0.5,
        }
    }
}

pub const DEFAULT_CONFIG_TEXT: &str = include_str!("../data/bess.conf");

fn positive(sec: &Section, key: &str) -> Result<f64, KvError> {
    let v = sec.f64(key)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(sec.invalid(key, format!("must be strictly positive, got {v}")))
    }
}

fn parse_cmax_table(sec: &Section) -> Result<Vec<(f64, f64)>, KvError> {
    let e = sec.require("cmax_table")?;
    let bad = |msg: String| KvError::Invalid { key: "battery.cmax_table".into(), line: e.line, msg };
    e.value
        .split(',')
        .map(|pair| {
            let (i, c) = pair.split_once(':').ok_or_else(|| bad(format!("expected `current:capacity`, got `{}`", pair.trim())))?;
            let i: f64 = i.trim().parse().map_err(|_| bad(format!("bad current `{}`", i.trim())))?;
            let c: f64 = c.trim().parse().map_err(|_| bad(format!("bad capacity `{}`", c.trim())))?;
            Ok((i, c))
        })
        .collect()
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let doc = Document::parse(text)?;

        let sec = doc.require_section("base")?;
        let base = BaseQuantities {
            s_base: positive(sec, "s_va")?,
            v_dc_base: positive(sec, "vdc_v")?,
            v_ac_base: positive(sec, "vac_v")?,
            f_nom: positive(sec, "f_hz")?,
        };

        let sec = doc.require_section("control")?;
        let control = ControlParams {
            delta_t: positive(sec, "delta_t_s")?,
            tick: positive(sec, "tick_s")?,
            eta: sec.f64("eta")?,
            xi: sec.f64("xi")?,
        };
        if !(control.eta > 0.0 && control.eta <= 1.0) {
            return Err(sec.invalid("eta", format!("must be in (0, 1], got {}", control.eta)).into());
        }
        if !(control.xi > 0.0) {
            return Err(sec.invalid("xi", format!("must be strictly positive, got {}", control.xi)).into());
        }
        if control.delta_t > control.tick {
            return Err(sec.invalid("delta_t_s", "must not exceed control.tick_s").into());
        }

        let droop = match doc.section("droop") {
            Some(sec) => {
                let d = DroopConfig {
                    alpha: sec.f64("alpha_mw_per_hz")?,
                    beta: sec.f64("beta_kvar_per_v")?,
                    db_f: sec.f64("db_f_hz")?,
                    db_v: sec.f64("db_v_v")?,
                    p_max: sec.f64_or("p_max_pu", 1.0)?,
                    q_max: sec.f64_or("q_max_pu", 1.0)?,
                };
                if d.db_f < 0.0 {
                    return Err(sec.invalid("db_f_hz", "must be non-negative").into());
                }
                if d.db_v < 0.0 {
                    return Err(sec.invalid("db_v_v", "must be non-negative").into());
                }
                if let Err(msg) = d.validate() {
                    return Err(sec.invalid("p_max_pu", msg).into());
                }
                d
            }
            None => DroopConfig::default(),
        };

        let (battery, soc0) = match doc.section("battery") {
            Some(sec) => {
                let p = TtcParams {
                    r_s: sec.f64("rs_pu")?,
                    r: [sec.f64("r1_pu")?, sec.f64("r2_pu")?, sec.f64("r3_pu")?],
                    c: [sec.f64("c1_pu")?, sec.f64("c2_pu")?, sec.f64("c3_pu")?],
                    a: sec.f64("ocv_a_pu")?,
                    b: sec.f64("ocv_b_pu")?,
                    c_max_table: parse_cmax_table(sec)?,
                    soc_min: sec.f64("soc_min")?,
                    soc_max: sec.f64("soc_max")?,
                    v_dc_min: sec.f64_or("vdc_min_pu", 600.0 / 700.0)?,
                    v_dc_max: sec.f64_or("vdc_max_pu", 800.0 / 700.0)?,
                };
                if let Err((key, msg)) = p.validate() {
                    return Err(sec.invalid(key, msg).into());
                }
                let soc0 = sec.f64_or("soc0", 0.5)?;
                if !(p.soc_min..=p.soc_max).contains(&soc0) {
                    return Err(sec.invalid("soc0", "must lie within [soc_min, soc_max]").into());
                }
                (p, soc0)
            }
            None => (TtcParams::default(), 0.5),
        };

        Ok(Self { base, control, droop, battery, soc0 })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let b = &self.battery;
        let table = b.c_max_table.iter().map(|(i, c)| format!("{i}:{c}")).collect::<Vec<_>>().join(", ");
        let _ = write!(
            s,
            "[base]\ns_va = {}\nvdc_v = {}\nvac_v = {}\nf_hz = {}\n\n\
             [control]\ndelta_t_s = {}\ntick_s = {}\neta = {}\nxi = {:e}\n\n\
             [droop]\nalpha_mw_per_hz = {}\nbeta_kvar_per_v = {}\ndb_f_hz = {}\ndb_v_v = {}\np_max_pu = {}\nq_max_pu = {}\n\n\
             [battery]\nrs_pu = {}\nr1_pu = {}\nr2_pu = {}\nr3_pu = {}\nc1_pu = {}\nc2_pu = {}\nc3_pu = {}\n\
             ocv_a_pu = {}\nocv_b_pu = {}\nsoc_min = {}\nsoc_max = {}\nvdc_min_pu = {}\nvdc_max_pu = {}\n\
             cmax_table = {}\nsoc0 = {}\n",
            self.base.s_base,
            self.base.v_dc_base,
            self.base.v_ac_base,
            self.base.f_nom,
            self.control.delta_t,
            self.control.tick,
            self.control.eta,
            self.control.xi,
            self.droop.alpha,
            self.droop.beta,
            self.droop.db_f,
            self.droop.db_v,
            self.droop.p_max,
            self.droop.q_max,
            b.r_s,
            b.r[0],
            b.r[1],
            b.r[2],
            b.c[0],
            b.c[1],
            b.c[2],
            b.a,
            b.b,
            b.soc_min,
            b.soc_max,
            b.v_dc_min,
            b.v_dc_max,
            table,
            self.soc0,
        );
        s
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<Config, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    Config::parse(&text)
}
