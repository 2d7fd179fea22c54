//! Convex regions in the (P, Q) plane and Euclidean projection onto them.
//!
//! A region is an intersection of half-planes and disks. In two dimensions the
//! projection of an outside point lands either on a single constraint boundary
//! (and is then the projection onto that constraint alone) or on a vertex where
//! two boundaries meet, so enumerating those candidates is exact.

use thiserror::Error;

use crate::capability::CapabilityCurve;

/// Candidate points may violate a constraint by at most this much [pu].
pub const CANDIDATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    fn dist_sq(self, o: Point) -> f64 {
        (self.x - o.x).powi(2) + (self.y - o.y).powi(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    /// `n·x <= c` with unit normal `n`.
    HalfPlane { nx: f64, ny: f64, c: f64 },
    /// `|x - center| <= r`.
    Disk { cx: f64, cy: f64, r: f64 },
}

impl Constraint {
    /// Half-plane `a·x + b·y <= c`, normalized.
    pub fn half_plane(a: f64, b: f64, c: f64) -> Self {
        let n = a.hypot(b);
        Constraint::HalfPlane { nx: a / n, ny: b / n, c: c / n }
    }

    /// Signed Euclidean distance to the boundary (positive outside).
    pub fn violation(&self, p: Point) -> f64 {
        match *self {
            Constraint::HalfPlane { nx, ny, c } => nx * p.x + ny * p.y - c,
            Constraint::Disk { cx, cy, r } => (p.x - cx).hypot(p.y - cy) - r,
        }
    }

    pub fn project(&self, p: Point) -> Point {
        match *self {
            Constraint::HalfPlane { nx, ny, c } => {
                let v = nx * p.x + ny * p.y - c;
                if v <= 0.0 {
                    p
                } else {
                    Point::new(p.x - v * nx, p.y - v * ny)
                }
            }
            Constraint::Disk { cx, cy, r } => {
                let d = (p.x - cx).hypot(p.y - cy);
                if d <= r {
                    p
                } else {
                    Point::new(cx + r * (p.x - cx) / d, cy + r * (p.y - cy) / d)
                }
            }
        }
    }
}

/// Points where the boundaries of `a` and `b` cross (at most two).
fn boundary_intersections(a: &Constraint, b: &Constraint, out: &mut Vec<Point>) {
    use Constraint::*;
    match (*a, *b) {
        (HalfPlane { nx: n1x, ny: n1y, c: c1 }, HalfPlane { nx: n2x, ny: n2y, c: c2 }) => {
            let det = n1x * n2y - n1y * n2x;
            if det.abs() < 1e-14 {
                return;
            }
            out.push(Point::new((c1 * n2y - n1y * c2) / det, (n1x * c2 - c1 * n2x) / det));
        }
        (HalfPlane { nx, ny, c }, Disk { cx, cy, r }) | (Disk { cx, cy, r }, HalfPlane { nx, ny, c }) => {
            let off = c - (nx * cx + ny * cy);
            if off.abs() > r {
                return;
            }
            let fx = cx + off * nx;
            let fy = cy + off * ny;
            let h = (r * r - off * off).max(0.0).sqrt();
            out.push(Point::new(fx - h * ny, fy + h * nx));
            out.push(Point::new(fx + h * ny, fy - h * nx));
        }
        (Disk { cx: x1, cy: y1, r: r1 }, Disk { cx: x2, cy: y2, r: r2 }) => {
            let dx = x2 - x1;
            let dy = y2 - y1;
            let d = dx.hypot(dy);
            if d < 1e-14 || d > r1 + r2 || d < (r1 - r2).abs() {
                return;
            }
            let along = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
            let h = (r1 * r1 - along * along).max(0.0).sqrt();
            let mx = x1 + along * dx / d;
            let my = y1 + along * dy / d;
            out.push(Point::new(mx - h * dy / d, my + h * dx / d));
            out.push(Point::new(mx + h * dy / d, my - h * dx / d));
        }
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
#[error("alternating projections did not converge within {sweeps} sweeps")]
pub struct Diverged {
    pub sweeps: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Region {
    pub constraints: Vec<Constraint>,
}

impl Region {
    /// Capability curve (with its SoC scale applied) cut to `p_lo <= P <= p_hi`.
    pub fn from_curve(curve: &CapabilityCurve, p_lo: f64, p_hi: f64) -> Self {
        let mut constraints: Vec<Constraint> = curve
            .scaled_halfspaces()
            .map(|h| Constraint::half_plane(h.a, h.b, h.c))
            .chain(curve.scaled_disks().map(|d| Constraint::Disk { cx: d.p0, cy: d.q0, r: d.r }))
            .collect();
        if p_hi.is_finite() {
            constraints.push(Constraint::HalfPlane { nx: 1.0, ny: 0.0, c: p_hi });
        }
        if p_lo.is_finite() {
            constraints.push(Constraint::HalfPlane { nx: -1.0, ny: 0.0, c: -p_lo });
        }
        Self { constraints }
    }

    pub fn max_violation(&self, p: Point) -> f64 {
        self.constraints.iter().map(|c| c.violation(p)).fold(f64::NEG_INFINITY, f64::max)
    }

    fn admits(&self, p: Point) -> bool {
        self.max_violation(p) <= CANDIDATE_TOL
    }

    /// Exact Euclidean projection; `None` when the region is empty.
    pub fn project(&self, target: Point) -> Option<Point> {
        if self.max_violation(target) <= 0.0 {
            return Some(target);
        }
        let mut best: Option<(f64, Point)> = None;
        let consider = |p: Point, best: &mut Option<(f64, Point)>| {
            if !(p.x.is_finite() && p.y.is_finite()) || !self.admits(p) {
                return;
            }
            let d = p.dist_sq(target);
            if best.is_none_or(|(bd, _)| d < bd) {
                *best = Some((d, p));
            }
        };
        for c in &self.constraints {
            if c.violation(target) > 0.0 {
                consider(c.project(target), &mut best);
            }
        }
        let mut pts = Vec::with_capacity(4);
        for (i, a) in self.constraints.iter().enumerate() {
            for b in &self.constraints[i + 1..] {
                pts.clear();
                boundary_intersections(a, b, &mut pts);
                for &p in &pts {
                    consider(p, &mut best);
                }
            }
        }
        best.map(|(_, p)| p)
    }

    /// Projection by Dykstra's alternating projections. Slower than
    /// [`Region::project`]; kept as an independent route for cross-checks.
    pub fn project_dykstra(&self, target: Point, tol: f64, max_sweeps: usize) -> Result<Point, Diverged> {
        let m = self.constraints.len();
        let mut x = target;
        let mut incr = vec![Point::new(0.0, 0.0); m];
        for _ in 0..max_sweeps {
            let mut moved = 0.0f64;
            for (c, y) in self.constraints.iter().zip(incr.iter_mut()) {
                let z = Point::new(x.x + y.x, x.y + y.y);
                let nx = c.project(z);
                *y = Point::new(z.x - nx.x, z.y - nx.y);
                moved = moved.max(nx.dist_sq(x));
                x = nx;
            }
            if moved.sqrt() <= tol && self.max_violation(x) <= tol {
                return Ok(x);
            }
        }
        Err(Diverged { sweeps: max_sweeps })
    }
}
