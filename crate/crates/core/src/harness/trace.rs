//! Synthetic grid measurements: frequency and AC voltage as independent
//! Ornstein-Uhlenbeck walks around their nominal values.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::units::GridMeasurement;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuParams {
    /// Mean-reversion rate [1/s].
    pub reversion: f64,
    /// Frequency volatility [Hz/sqrt(s)].
    pub f_vol: f64,
    /// AC voltage volatility [pu/sqrt(s)].
    pub v_vol: f64,
    /// Sample spacing [s].
    pub dt: f64,
    pub f_nom: f64,
}

impl Default for OuParams {
    fn default() -> Self {
        Self { reversion: 0.1, f_vol: 0.015, v_vol: 0.002, dt: 0.1, f_nom: 50.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub dt: f64,
    pub samples: Vec<GridMeasurement>,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("duration and sample spacing must be positive")]
    Duration,
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("trace needs at least two samples")]
    TooShort,
    #[error("line {line}: sample spacing {got} differs from {dt}")]
    Spacing { line: usize, got: f64, dt: f64 },
}

/// Exact discretization of `dx = -k (x - mu) dt + sigma dW` over one step.
struct OuStep {
    decay: f64,
    spread: f64,
}

impl OuStep {
    fn new(reversion: f64, vol: f64, dt: f64) -> Self {
        let decay = (-reversion * dt).exp();
        let spread = if reversion > 0.0 {
            vol * ((1.0 - decay * decay) / (2.0 * reversion)).sqrt()
        } else {
            vol * dt.sqrt()
        };
        Self { decay, spread }
    }

    fn next(&self, x: f64, mean: f64, z: f64) -> f64 {
        mean + (x - mean) * self.decay + self.spread * z
    }
}

pub fn gen_trace(seed: u64, duration: f64, params: &OuParams) -> Result<Trace, TraceError> {
    if !(duration > 0.0 && params.dt > 0.0) {
        return Err(TraceError::Duration);
    }
    let n = ((duration / params.dt).round() as usize).max(2);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let f_step = OuStep::new(params.reversion, params.f_vol, params.dt);
    let v_step = OuStep::new(params.reversion, params.v_vol, params.dt);
    let (mut f, mut v) = (params.f_nom, 1.0);
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        samples.push(GridMeasurement { t: k as f64 * params.dt, f, v_ac: v });
        let zf: f64 = rng.sample(StandardNormal);
        let zv: f64 = rng.sample(StandardNormal);
        f = f_step.next(f, params.f_nom, zf);
        v = v_step.next(v, 1.0, zv);
    }
    Ok(Trace { dt: params.dt, samples })
}

impl Trace {
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.dt
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_s,f_hz,vac_pu\n");
        for m in &self.samples {
            let _ = writeln!(out, "{},{},{}", m.t, m.f, m.v_ac);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, TraceError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim() == "t_s,f_hz,vac_pu" => {}
            _ => return Err(TraceError::Parse { line: 1, msg: "expected header `t_s,f_hz,vac_pu`".into() }),
        }
        let mut samples = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            let bad = |msg: String| TraceError::Parse { line: line_no, msg };
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(bad(format!("expected 3 columns, found {}", cols.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number `{s}`")));
            let m = GridMeasurement { t: num(cols[0])?, f: num(cols[1])?, v_ac: num(cols[2])? };
            if !m.is_plausible() {
                return Err(bad(format!("implausible sample f={} vac={}", m.f, m.v_ac)));
            }
            samples.push((line_no, m));
        }
        if samples.len() < 2 {
            return Err(TraceError::TooShort);
        }
        let dt = samples[1].1.t - samples[0].1.t;
        if !(dt > 0.0) {
            return Err(TraceError::Spacing { line: samples[1].0, got: dt, dt });
        }
        for w in samples.windows(2) {
            let got = w[1].1.t - w[0].1.t;
            if (got - dt).abs() > 1e-6 * dt {
                return Err(TraceError::Spacing { line: w[1].0, got, dt });
            }
        }
        Ok(Self { dt, samples: samples.into_iter().map(|(_, m)| m).collect() })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TraceError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| TraceError::Io { path: path.display().to_string(), source })?;
        Self::from_csv(&text)
    }
}
