//! Optimal setpoint projection.
//!
//! The original problem minimizes the distance to the droop request subject to
//! the capability curve, the SoC power window, the DC-bus equality
//! `v² + (Σvc − E)·v + p_dc·R_s = 0` and the DC-bus voltage bounds. The
//! convexified form relaxes the equality to `<= 0` and rewards large `v` with
//! `−ξ·v`, which drives the relaxed constraint back to equality.
//!
//! With the efficiency branch fixed by the sign of the request, `p_dc` is a
//! linear image of `P`, and for fixed `p_dc` the best `v` is the larger root of
//! the quadratic. What remains is a convex program in `(P, Q)` alone:
//!
//! ```text
//! minimize   (P − P0)² + (Q − Q0)² − ξ·v⁺(gain·P)
//! subject to (P, Q) in capability region,  P in [p_lo, p_hi]
//! ```
//!
//! where `[p_lo, p_hi]` collects the SoC window and the values of `P` whose
//! larger root lies inside the voltage bounds. `v⁺` is concave in `p_dc`, so
//! the objective is convex and the minimizer is the fixed point of
//! `x = proj(P0 + (ξ/2)·gain·v⁺'(gain·x_P), Q0)`.

pub mod oracle;
pub mod region;

use thiserror::Error;

use crate::battery::{self, BatteryState, EfficiencyBranch, TtcParams};
use crate::capability::CapabilityCurve;
use crate::units::{BaseQuantities, ControlParams, Setpoint};

pub use oracle::oracle;
pub use region::{Constraint, Point, Region};

/// Constraint tolerance used for the pass-through test and reported results [pu].
pub const FEAS_TOL: f64 = 1e-9;
/// Sweep cap for the fixed-point and alternating-projection loops.
pub const MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum SolveError {
    #[error("no setpoint in the capability region admits a DC-bus voltage within bounds")]
    Infeasible,
    #[error("projection did not converge within {0} sweeps")]
    Diverged(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionStatus {
    /// The request was already feasible and is returned unchanged.
    Passthrough,
    /// The request was projected onto the feasible region.
    Feasible,
}

impl ProjectionStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Passthrough => "passthrough",
            Self::Feasible => "feasible",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionResult {
    pub s: Setpoint,
    pub v_dc: f64,
    pub p_dc: f64,
    /// `(P−P0)² + (Q−Q0)² − ξ·v_dc` for the solver, plain squared distance for the oracle.
    pub objective: f64,
    pub tight: bool,
    pub status: ProjectionStatus,
}

/// Best DC-bus voltage for a fixed DC power under the relaxed constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VStar {
    pub v: f64,
    /// The relaxed constraint holds with equality (`v` is the larger root).
    pub tight: bool,
}

/// One projection instance.
#[derive(Debug, Clone, Copy)]
pub struct ProjectionProblem<'a> {
    pub s0: Setpoint,
    pub curve: &'a CapabilityCurve,
    pub vc_sum: f64,
    /// Open-circuit voltage [pu].
    pub e: f64,
    pub r_s: f64,
    pub eta: f64,
    pub p_dc_bounds: (f64, f64),
    pub v_bounds: (f64, f64),
    pub xi: f64,
}

impl<'a> ProjectionProblem<'a> {
    /// Problem for the current plant state: OCV from SoC, SoC power window for one tick.
    pub fn from_state(
        s0: Setpoint,
        curve: &'a CapabilityCurve,
        state: &BatteryState,
        params: &TtcParams,
        control: &ControlParams,
        base: &BaseQuantities,
    ) -> Self {
        Self {
            s0,
            curve,
            vc_sum: state.vc_sum(),
            e: battery::ocv(state.soc, params),
            r_s: params.r_s,
            eta: control.eta,
            p_dc_bounds: battery::soc_power_bounds(state, params, control.tick, base),
            v_bounds: (params.v_dc_min, params.v_dc_max),
            xi: control.xi,
        }
    }

    pub fn with_s0(&self, s0: Setpoint) -> Self {
        Self { s0, ..*self }
    }

    pub fn branch(&self) -> EfficiencyBranch {
        EfficiencyBranch::of(self.s0.p)
    }

    /// `dp_dc / dP` under the branch selected by `s0`.
    pub fn gain(&self) -> f64 {
        self.branch().gain(self.eta)
    }

    pub fn p_dc(&self, p_ac: f64) -> f64 {
        self.gain() * p_ac
    }

    fn c(&self) -> f64 {
        self.e - self.vc_sum
    }

    pub fn v_star(&self, p_dc: f64) -> Result<VStar, SolveError> {
        let c = self.c();
        let disc = c * c - 4.0 * p_dc * self.r_s;
        if disc < 0.0 {
            return Err(SolveError::Infeasible);
        }
        let upper = battery::upper_root(self.vc_sum, self.e, p_dc, self.r_s).map_err(|_| SolveError::Infeasible)?;
        // v⁺·v⁻ = p_dc·R_s
        let lower = if upper != 0.0 { p_dc * self.r_s / upper } else { c - upper };
        let (v_min, v_max) = self.v_bounds;
        let v = upper.min(v_max);
        if v < lower.max(v_min) {
            return Err(SolveError::Infeasible);
        }
        Ok(VStar { v, tight: v == upper })
    }

    /// DC-power window where the larger root exists, lies inside the voltage
    /// bounds, and the SoC window holds. `None` when empty.
    pub fn p_dc_window(&self) -> Option<(f64, f64)> {
        let c = self.c();
        let (v_min, v_max) = self.v_bounds;
        let r = self.r_s;
        if v_max < 0.5 * c {
            return None;
        }
        let v_lo = v_max * (c - v_max) / r;
        let v_hi = if v_min <= 0.5 * c { c * c / (4.0 * r) } else { v_min * (c - v_min) / r };
        let lo = v_lo.max(self.p_dc_bounds.0);
        let hi = v_hi.min(self.p_dc_bounds.1);
        (lo <= hi).then_some((lo, hi))
    }

    /// The window of [`Self::p_dc_window`] expressed in AC active power.
    pub fn p_ac_window(&self) -> Option<(f64, f64)> {
        let g = self.gain();
        self.p_dc_window().map(|(lo, hi)| (lo / g, hi / g))
    }

    /// Feasible for the original problem: inside the capability curve, inside
    /// the SoC window, and admitting a tight DC-bus voltage within bounds.
    pub fn is_feasible(&self, s: &Setpoint, tol: f64) -> bool {
        if self.curve.h_eval(s) > tol {
            return false;
        }
        let p_dc = self.p_dc(s.p);
        if p_dc < self.p_dc_bounds.0 - tol || p_dc > self.p_dc_bounds.1 + tol {
            return false;
        }
        match battery::upper_root(self.vc_sum, self.e, p_dc, self.r_s) {
            Ok(v) => v >= self.v_bounds.0 - tol && v <= self.v_bounds.1 + tol,
            Err(_) => false,
        }
    }

    pub fn objective(&self, s: &Setpoint, v: f64) -> f64 {
        s.dist_sq(&self.s0) - self.xi * v
    }

    /// `d v⁺ / d p_dc`, zero where the root is undefined.
    fn dv_dp(&self, p_dc: f64) -> f64 {
        let c = self.c();
        let disc = c * c - 4.0 * p_dc * self.r_s;
        if disc > 0.0 {
            -self.r_s / disc.sqrt()
        } else {
            0.0
        }
    }

    pub fn region(&self) -> Option<Region> {
        let (lo, hi) = self.p_ac_window()?;
        Some(Region::from_curve(self.curve, lo, hi))
    }

    fn finish(&self, s: Setpoint, status: ProjectionStatus) -> ProjectionResult {
        let p_dc = self.p_dc(s.p);
        let v = battery::upper_root(self.vc_sum, self.e, p_dc, self.r_s).unwrap_or(f64::NAN);
        let residual = battery::vdc_residual(v, self.vc_sum, self.e, p_dc, self.r_s);
        ProjectionResult {
            s,
            v_dc: v,
            p_dc,
            objective: self.objective(&s, v),
            tight: residual.abs() <= 1e-8,
            status,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProjectionMethod {
    /// Exact boundary/vertex enumeration.
    #[default]
    ActiveSet,
    /// Dykstra alternating projections.
    Dykstra,
}

/// Solves the convexified projection with the default (exact) method.
pub fn solve(prob: &ProjectionProblem) -> Result<ProjectionResult, SolveError> {
    solve_with(prob, ProjectionMethod::ActiveSet)
}

pub fn solve_with(prob: &ProjectionProblem, method: ProjectionMethod) -> Result<ProjectionResult, SolveError> {
    if prob.is_feasible(&prob.s0, FEAS_TOL) {
        return Ok(prob.finish(prob.s0, ProjectionStatus::Passthrough));
    }
    let region = prob.region().ok_or(SolveError::Infeasible)?;
    let anchor = Point::new(prob.s0.p, prob.s0.q);
    // Emptiness is decided by the exact enumeration whatever the method.
    let first = region.project(anchor).ok_or(SolveError::Infeasible)?;
    let project = |t: Point| -> Result<Point, SolveError> {
        match method {
            ProjectionMethod::ActiveSet => region.project(t).ok_or(SolveError::Infeasible),
            ProjectionMethod::Dykstra => {
                region.project_dykstra(t, 1e-14, MAX_SWEEPS).map_err(|d| SolveError::Diverged(d.sweeps))
            }
        }
    };

    let gain = prob.gain();
    let mut x = match method {
        ProjectionMethod::ActiveSet => first,
        ProjectionMethod::Dykstra => project(anchor)?,
    };
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let shift = 0.5 * prob.xi * gain * prob.dv_dp(gain * x.x);
        let next = project(Point::new(anchor.x + shift, anchor.y))?;
        let step = (next.x - x.x).abs().max((next.y - x.y).abs());
        x = next;
        if step <= 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SolveError::Diverged(MAX_SWEEPS));
    }
    let res = prob.finish(Setpoint::new(x.x, x.y), ProjectionStatus::Feasible);
    if !res.v_dc.is_finite() {
        return Err(SolveError::Infeasible);
    }
    Ok(res)
}
