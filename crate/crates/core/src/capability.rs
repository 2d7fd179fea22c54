//! Voltage-dependent converter capability regions.
//!
//! Each curve is an intersection of half-planes `a·P + b·Q <= c` and disks
//! `(P-p0)² + (Q-q0)² <= r²`, so every region is convex by construction.
//! Curves are indexed by the (AC, DC) voltage pair they were characterized at.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::kv::{self, Document, KvError};
use crate::units::Setpoint;

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Parse(#[from] KvError),
    #[error("curve at line {line}: {msg}")]
    Invalid { line: usize, msg: String },
    #[error("curve file contains no [curve] sections")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSpace {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl HalfSpace {
    pub fn violation(&self, p: f64, q: f64) -> f64 {
        self.a * p + self.b * q - self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub p0: f64,
    pub q0: f64,
    pub r: f64,
}

impl Disk {
    pub fn violation(&self, p: f64, q: f64) -> f64 {
        (p - self.p0).hypot(q - self.q0) - self.r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapabilityCurve {
    pub v_ac_key: f64,
    pub v_dc_key: f64,
    pub halfspaces: Vec<HalfSpace>,
    pub disks: Vec<Disk>,
    /// Isotropic scale applied to the whole region (SoC derating hook).
    pub soc_scale: f64,
}

impl CapabilityCurve {
    /// Circle of radius `s_max`, the usual apparent-power approximation.
    pub fn circle(s_max: f64) -> Self {
        Self {
            v_ac_key: 1.0,
            v_dc_key: 1.0,
            halfspaces: Vec::new(),
            disks: vec![Disk { p0: 0.0, q0: 0.0, r: s_max }],
            soc_scale: 1.0,
        }
    }

    pub fn with_halfspace(mut self, a: f64, b: f64, c: f64) -> Self {
        self.halfspaces.push(HalfSpace { a, b, c });
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.disks.is_empty() {
            return Err("at least one disk is required".into());
        }
        if !(self.soc_scale.is_finite() && self.soc_scale > 0.0) {
            return Err(format!("soc_scale must be positive, got {}", self.soc_scale));
        }
        if self.disks.iter().any(|d| !(d.r.is_finite() && d.r > 0.0)) {
            return Err("disk radius must be positive".into());
        }
        if self.halfspaces.iter().any(|h| h.a == 0.0 && h.b == 0.0) {
            return Err("half-space normal must be non-zero".into());
        }
        if !(self.v_ac_key.is_finite() && self.v_dc_key.is_finite()) {
            return Err("voltage keys must be finite".into());
        }
        let origin = self.h_eval(&Setpoint::ZERO);
        if !(origin < 0.0) {
            return Err(format!("origin is not strictly inside the region (margin {origin})"));
        }
        Ok(())
    }

    /// Largest signed constraint violation at `s`; `<= 0` iff feasible.
    pub fn h_eval(&self, s: &Setpoint) -> f64 {
        let p = s.p / self.soc_scale;
        let q = s.q / self.soc_scale;
        let hs = self.halfspaces.iter().map(|h| h.violation(p, q));
        let ds = self.disks.iter().map(|d| d.violation(p, q));
        hs.chain(ds).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, s: &Setpoint) -> bool {
        self.h_eval(s) <= 0.0
    }

    /// Half-spaces in absolute (P, Q) coordinates after applying `soc_scale`.
    pub fn scaled_halfspaces(&self) -> impl Iterator<Item = HalfSpace> + '_ {
        let k = self.soc_scale;
        self.halfspaces.iter().map(move |h| HalfSpace { a: h.a, b: h.b, c: h.c * k })
    }

    /// Disks in absolute (P, Q) coordinates after applying `soc_scale`.
    pub fn scaled_disks(&self) -> impl Iterator<Item = Disk> + '_ {
        let k = self.soc_scale;
        self.disks.iter().map(move |d| Disk { p0: d.p0 * k, q0: d.q0 * k, r: d.r * k })
    }

    /// `(p_min, p_max, q_min, q_max)` enclosing the region.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        self.scaled_disks().fold(
            (f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY),
            |(p0, p1, q0, q1), d| (p0.max(d.p0 - d.r), p1.min(d.p0 + d.r), q0.max(d.q0 - d.r), q1.min(d.q0 + d.r)),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapabilityCurveSet {
    pub curves: Vec<CapabilityCurve>,
}

const TIE_EPS: f64 = 1e-12;

impl CapabilityCurveSet {
    pub fn new(curves: Vec<CapabilityCurve>) -> Result<Self, String> {
        if curves.is_empty() {
            return Err("curve set is empty".into());
        }
        for (i, a) in curves.iter().enumerate() {
            a.validate()?;
            if curves[..i].iter().any(|b| b.v_ac_key == a.v_ac_key && b.v_dc_key == a.v_dc_key) {
                return Err(format!("duplicate curve key (vac {}, vdc {})", a.v_ac_key, a.v_dc_key));
            }
        }
        Ok(Self { curves })
    }

    pub fn single(curve: CapabilityCurve) -> Self {
        Self { curves: vec![curve] }
    }

    /// Index of the curve nearest to the measured voltages. Exact ties go to
    /// the lower DC key, which has the smaller region.
    pub fn select_index(&self, v_ac: f64, v_dc: f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, c) in self.curves.iter().enumerate() {
            let d = (v_ac - c.v_ac_key).powi(2) + (v_dc - c.v_dc_key).powi(2);
            let tie = (d - best_d).abs() <= TIE_EPS;
            if (!tie && d < best_d) || (tie && c.v_dc_key < self.curves[best].v_dc_key) {
                best = i;
                best_d = d;
            }
        }
        best
    }

    pub fn select_curve(&self, v_ac: f64, v_dc: f64) -> &CapabilityCurve {
        &self.curves[self.select_index(v_ac, v_dc)]
    }

    /// Illustrative shipped family: unit disk clipped at |P| <= 0.95 with a
    /// reactive ceiling that flattens as the DC voltage drops.
    pub fn default_set() -> Self {
        let mut curves = Vec::new();
        for v_ac in [0.95, 1.0, 1.05] {
            for v_dc in [0.9, 1.0, 1.1] {
                let q_cap = 0.9 - 0.2 * (1.0 - v_dc);
                curves.push(CapabilityCurve {
                    v_ac_key: v_ac,
                    v_dc_key: v_dc,
                    halfspaces: vec![
                        HalfSpace { a: 1.0, b: 0.0, c: 0.95 },
                        HalfSpace { a: -1.0, b: 0.0, c: 0.95 },
                        HalfSpace { a: 0.0, b: 1.0, c: q_cap },
                    ],
                    disks: vec![Disk { p0: 0.0, q0: 0.0, r: 1.0 }],
                    soc_scale: 1.0,
                });
            }
        }
        Self { curves }
    }

    pub fn parse(text: &str) -> Result<Self, CurveError> {
        let doc = Document::parse(text)?;
        let mut curves = Vec::new();
        for sec in doc.sections_named("curve") {
            let mut halfspaces = Vec::new();
            for e in sec.all("halfspace") {
                let v = kv::parse_f64_list(e, "curve.halfspace", 3)?;
                halfspaces.push(HalfSpace { a: v[0], b: v[1], c: v[2] });
            }
            let mut disks = Vec::new();
            for e in sec.all("disk") {
                let v = kv::parse_f64_list(e, "curve.disk", 3)?;
                disks.push(Disk { p0: v[0], q0: v[1], r: v[2] });
            }
            for e in &sec.entries {
                if !matches!(e.key.as_str(), "vac_pu" | "vdc_pu" | "halfspace" | "disk" | "soc_scale") {
                    return Err(CurveError::Invalid { line: e.line, msg: format!("unknown key `{}`", e.key) });
                }
            }
            let curve = CapabilityCurve {
                v_ac_key: sec.f64("vac_pu")?,
                v_dc_key: sec.f64("vdc_pu")?,
                halfspaces,
                disks,
                soc_scale: sec.f64_or("soc_scale", 1.0)?,
            };
            curve.validate().map_err(|msg| CurveError::Invalid { line: sec.line, msg })?;
            curves.push(curve);
        }
        if curves.is_empty() {
            return Err(CurveError::Empty);
        }
        Self::new(curves).map_err(|msg| CurveError::Invalid { line: 0, msg })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.curves {
            let _ = writeln!(out, "[curve]");
            let _ = writeln!(out, "vac_pu = {}", c.v_ac_key);
            let _ = writeln!(out, "vdc_pu = {}", c.v_dc_key);
            if c.soc_scale != 1.0 {
                let _ = writeln!(out, "soc_scale = {}", c.soc_scale);
            }
            for h in &c.halfspaces {
                let _ = writeln!(out, "halfspace = {} {} {}", h.a, h.b, h.c);
            }
            for d in &c.disks {
                let _ = writeln!(out, "disk = {} {} {}", d.p0, d.q0, d.r);
            }
            out.push('\n');
        }
        out
    }
}

/// Text of the built-in curve set.
pub const DEFAULT_CURVES_TEXT: &str = include_str!("../data/curves.conf");

pub fn load_curves(path: impl AsRef<Path>) -> Result<CapabilityCurveSet, CurveError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| CurveError::Io { path: path.display().to_string(), source })?;
    CapabilityCurveSet::parse(&text)
}
