//! Brute-force reference for the original (non-convexified) projection.
//!
//! Scans every row and column of a uniform grid over the capability bounding
//! box. Along each grid line the feasible set is an interval, so the point
//! nearest to the request on that line is either the request's own foot or an
//! interval end, located by bisection between the first feasible grid point
//! and its infeasible neighbour. Feasibility is checked directly on the
//! original constraints: the capability margin, the piecewise efficiency map
//! evaluated at each candidate's own sign, the SoC power window, and the
//! DC-bus equality solved for its larger root. Nothing here goes through the
//! solver's reduced formulation.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::{ProjectionProblem, ProjectionResult, ProjectionStatus, SolveError};
use crate::battery::{self, EfficiencyBranch};
use crate::units::Setpoint;

const LINE_BISECTIONS: usize = 60;

fn feasible(prob: &ProjectionProblem, s: &Setpoint) -> Option<(f64, f64)> {
    if prob.curve.h_eval(s) > 0.0 {
        return None;
    }
    let p_dc = EfficiencyBranch::of(s.p).gain(prob.eta) * s.p;
    if p_dc < prob.p_dc_bounds.0 || p_dc > prob.p_dc_bounds.1 {
        return None;
    }
    let v = battery::upper_root(prob.vc_sum, prob.e, p_dc, prob.r_s).ok()?;
    (v >= prob.v_bounds.0 && v <= prob.v_bounds.1).then_some((v, p_dc))
}

#[derive(Debug, Clone, Copy)]
struct Hit {
    d2: f64,
    s: Setpoint,
    v: f64,
    p_dc: f64,
}

/// Nearest feasible point to `target` on the line `at(x)`, with grid indices
/// `k0..=k1` along the line and `x` in grid units. `target` lies within the
/// line's extent but need not be a grid index.
fn line_best(prob: &ProjectionProblem, k0: i64, k1: i64, target: f64, at: impl Fn(f64) -> Setpoint) -> Option<Hit> {
    let hit = |x: f64| feasible(prob, &at(x)).map(|(v, p_dc)| (at(x), v, p_dc));
    if let Some((s, v, p_dc)) = hit(target) {
        return Some(Hit { d2: s.dist_sq(&prob.s0), s, v, p_dc });
    }
    // walk outward from the foot to the nearest feasible grid point
    let near = (target.round() as i64).clamp(k0, k1);
    let (mut up, mut down) = (near, near - 1);
    let k = loop {
        let d_up = if up <= k1 { (up as f64 - target).abs() } else { f64::INFINITY };
        let d_down = if down >= k0 { (down as f64 - target).abs() } else { f64::INFINITY };
        if d_up.is_infinite() && d_down.is_infinite() {
            return None;
        }
        let k = if d_down <= d_up {
            down -= 1;
            down + 1
        } else {
            up += 1;
            up - 1
        };
        if hit(k as f64).is_some() {
            break k;
        }
    };
    // the interval end facing the foot lies between k and its neighbour
    let (mut inside, mut outside) = (k as f64, if target > k as f64 { (k as f64 + 1.0).min(target) } else { (k as f64 - 1.0).max(target) });
    for _ in 0..LINE_BISECTIONS {
        let mid = 0.5 * (inside + outside);
        if hit(mid).is_some() {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    let (s, v, p_dc) = hit(inside)?;
    Some(Hit { d2: s.dist_sq(&prob.s0), s, v, p_dc })
}

fn better(a: Hit, b: Hit) -> Hit {
    let key = |h: &Hit| (h.d2, h.s.p, h.s.q);
    if key(&b).partial_cmp(&key(&a)) == Some(std::cmp::Ordering::Less) {
        b
    } else {
        a
    }
}

/// Nearest feasible point over all rows and columns of the grid with spacing
/// `grid_step`.
pub fn oracle(prob: &ProjectionProblem, grid_step: f64) -> Result<ProjectionResult, SolveError> {
    assert!(grid_step > 0.0, "grid step must be positive");
    let h = grid_step;
    let (p_min, p_max, q_min, q_max) = prob.curve.bounding_box();
    let (i0, i1) = ((p_min / h).ceil() as i64, (p_max / h).floor() as i64);
    let (j0, j1) = ((q_min / h).ceil() as i64, (q_max / h).floor() as i64);
    let s0 = prob.s0;

    // rows hold P fixed at i·h, columns hold Q fixed at j·h
    let lines: Vec<(bool, i64)> = (i0..=i1).map(|i| (true, i)).chain((j0..=j1).map(|j| (false, j))).collect();
    let scan_line = |&(row, k): &(bool, i64)| {
        if row {
            let p = k as f64 * h;
            let tq = s0.q.clamp(q_min, q_max) / h;
            line_best(prob, j0, j1, tq, |x| Setpoint::new(p, x * h))
        } else {
            let q = k as f64 * h;
            let tp = s0.p.clamp(p_min, p_max) / h;
            line_best(prob, i0, i1, tp, |x| Setpoint::new(x * h, q))
        }
    };
    #[cfg(feature = "parallel")]
    let best = lines.par_iter().filter_map(scan_line).reduce_with(better);
    #[cfg(not(feature = "parallel"))]
    let best = lines.iter().filter_map(scan_line).reduce(better);

    let b = best.ok_or(SolveError::Infeasible)?;
    Ok(ProjectionResult {
        s: b.s,
        v_dc: b.v,
        p_dc: b.p_dc,
        objective: b.d2,
        tight: true,
        status: if b.s == prob.s0 { ProjectionStatus::Passthrough } else { ProjectionStatus::Feasible },
    })
}
