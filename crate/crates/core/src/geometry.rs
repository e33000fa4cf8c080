//! Exact 2-D convex polytope arithmetic over rationals: half-plane
//! intersection, vertex enumeration, containment/equality, and linear
//! maximization. Everything is decided exactly; no floats.

use num_traits::{Signed, Zero};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::Rat;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("half-plane system is unbounded")]
    Unbounded,
    #[error("half-plane system is empty")]
    Empty,
}

/// A DoF pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct DofPoint {
    pub d1: Rat,
    pub d2: Rat,
}

impl DofPoint {
    pub fn new(d1: Rat, d2: Rat) -> Self {
        DofPoint { d1, d2 }
    }

    pub fn from_ints(d1: i64, d2: i64) -> Self {
        DofPoint { d1: Rat::from_integer(d1), d2: Rat::from_integer(d2) }
    }
}

/// The constraint `a*d1 + b*d2 <= c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HalfPlane {
    pub a: Rat,
    pub b: Rat,
    pub c: Rat,
}

impl HalfPlane {
    pub fn new(a: Rat, b: Rat, c: Rat) -> Self {
        assert!(!(a.is_zero() && b.is_zero()), "degenerate half-plane");
        HalfPlane { a, b, c }
    }

    /// `d1/x + d2/y <= 1` written with integer data.
    pub fn sum_bound(x: i64, y: i64) -> Self {
        HalfPlane::new(Rat::new(1, x), Rat::new(1, y), Rat::from_integer(1))
    }

    /// `d1 <= bound` (axis = 1) or `d2 <= bound` (axis = 2).
    pub fn upper(axis: u8, bound: i64) -> Self {
        match axis {
            1 => HalfPlane::new(Rat::from_integer(1), Rat::zero(), Rat::from_integer(bound)),
            2 => HalfPlane::new(Rat::zero(), Rat::from_integer(1), Rat::from_integer(bound)),
            _ => panic!("axis must be 1 or 2"),
        }
    }

    pub fn nonneg(axis: u8) -> Self {
        match axis {
            1 => HalfPlane::new(Rat::from_integer(-1), Rat::zero(), Rat::zero()),
            2 => HalfPlane::new(Rat::zero(), Rat::from_integer(-1), Rat::zero()),
            _ => unreachable!(),
        }
    }

    /// Scale so the leading nonzero coefficient of (a, b) has magnitude 1.
    pub fn canonical(self) -> Self {
        let lead = if !self.a.is_zero() { self.a } else { self.b };
        let scale = lead.abs().recip();
        HalfPlane { a: self.a * scale, b: self.b * scale, c: self.c * scale }
    }

    pub fn satisfied(&self, p: DofPoint) -> bool {
        self.a * p.d1 + self.b * p.d2 <= self.c
    }

    pub fn tight(&self, p: DofPoint) -> bool {
        self.a * p.d1 + self.b * p.d2 == self.c
    }
}

/// Bounded, non-empty convex polytope in the non-negative quadrant.
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope2D {
    constraints: Vec<HalfPlane>,
    vertices: Vec<DofPoint>,
}

fn cross(o: DofPoint, a: DofPoint, b: DofPoint) -> Rat {
    (a.d1 - o.d1) * (b.d2 - o.d2) - (a.d2 - o.d2) * (b.d1 - o.d1)
}

impl Polytope2D {
    /// Intersect the given half-planes (plus `d1 >= 0`, `d2 >= 0`) and
    /// enumerate vertices.
    pub fn from_halfplanes(hs: &[HalfPlane]) -> Result<Self, GeometryError> {
        let mut cons: Vec<HalfPlane> = Vec::with_capacity(hs.len() + 2);
        for h in hs.iter().map(|h| h.canonical()) {
            if !cons.contains(&h) {
                cons.push(h);
            }
        }
        for axis in [1, 2] {
            let h = HalfPlane::nonneg(axis);
            if !cons.contains(&h) {
                cons.push(h);
            }
        }

        // Boundedness: the recession cone {r | a.r <= 0 for all constraints}
        // must be trivial. If it is not, it has an extreme ray lying on some
        // constraint boundary, i.e. a rotation of some normal.
        for h in &cons {
            for ray in [(h.b, -h.a), (-h.b, h.a)] {
                if ray.0.is_zero() && ray.1.is_zero() {
                    continue;
                }
                if cons.iter().all(|g| g.a * ray.0 + g.b * ray.1 <= Rat::zero()) {
                    return Err(GeometryError::Unbounded);
                }
            }
        }

        // Vertex candidates from pairwise line intersections.
        let mut vertices: Vec<DofPoint> = Vec::new();
        for i in 0..cons.len() {
            for j in i + 1..cons.len() {
                let (p, q) = (&cons[i], &cons[j]);
                let det = p.a * q.b - p.b * q.a;
                if det.is_zero() {
                    continue;
                }
                let d1 = (p.c * q.b - p.b * q.c) / det;
                let d2 = (p.a * q.c - p.c * q.a) / det;
                let v = DofPoint::new(d1, d2);
                if cons.iter().all(|h| h.satisfied(v)) && !vertices.contains(&v) {
                    vertices.push(v);
                }
            }
        }
        if vertices.is_empty() {
            return Err(GeometryError::Empty);
        }

        sort_ccw(&mut vertices);

        // A constraint is an edge iff it is tight at two vertices; the
        // non-negativity constraints are kept regardless (API contract).
        let needed = 2.min(vertices.len());
        cons.retain(|h| {
            h == &HalfPlane::nonneg(1)
                || h == &HalfPlane::nonneg(2)
                || vertices.iter().filter(|v| h.tight(**v)).count() >= needed
        });

        Ok(Polytope2D { constraints: cons, vertices })
    }

    /// Convex hull of the given points, as a polytope.
    pub fn from_vertices(points: &[DofPoint]) -> Result<Self, GeometryError> {
        let mut pts: Vec<DofPoint> = Vec::new();
        for p in points {
            assert!(p.d1 >= Rat::zero() && p.d2 >= Rat::zero(), "negative DoF point");
            if !pts.contains(p) {
                pts.push(*p);
            }
        }
        if pts.is_empty() {
            return Err(GeometryError::Empty);
        }
        pts.sort_by(|p, q| (p.d1, p.d2).cmp(&(q.d1, q.d2)));
        // Monotone chain; hull comes out counterclockwise.
        let hull = if pts.len() <= 2 {
            pts.clone()
        } else {
            let mut lower: Vec<DofPoint> = Vec::new();
            for &p in &pts {
                while lower.len() >= 2
                    && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= Rat::zero()
                {
                    lower.pop();
                }
                lower.push(p);
            }
            let mut upper: Vec<DofPoint> = Vec::new();
            for &p in pts.iter().rev() {
                while upper.len() >= 2
                    && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= Rat::zero()
                {
                    upper.pop();
                }
                upper.push(p);
            }
            lower.pop();
            upper.pop();
            lower.extend(upper);
            lower
        };

        // Edge constraints: outward normal of CCW edge (p -> q) is (qy-py, px-qx).
        let mut cons: Vec<HalfPlane> = Vec::new();
        let push = |cons: &mut Vec<HalfPlane>, a: Rat, b: Rat, c: Rat| {
            let h = HalfPlane::new(a, b, c).canonical();
            if !cons.contains(&h) {
                cons.push(h);
            }
        };
        match hull.len() {
            1 => {
                // Point: pin both coordinates.
                let p = hull[0];
                push(&mut cons, Rat::from_integer(1), Rat::zero(), p.d1);
                push(&mut cons, Rat::from_integer(-1), Rat::zero(), -p.d1);
                push(&mut cons, Rat::zero(), Rat::from_integer(1), p.d2);
                push(&mut cons, Rat::zero(), Rat::from_integer(-1), -p.d2);
            }
            2 => {
                // Segment: opposite edge-parallel pair plus endpoint caps.
                let (p, q) = (hull[0], hull[1]);
                let (a, b) = (q.d2 - p.d2, p.d1 - q.d1);
                let c = a * p.d1 + b * p.d2;
                push(&mut cons, a, b, c);
                push(&mut cons, -a, -b, -c);
                let (dx, dy) = (q.d1 - p.d1, q.d2 - p.d2);
                push(&mut cons, dx, dy, dx * q.d1 + dy * q.d2);
                push(&mut cons, -dx, -dy, -(dx * p.d1 + dy * p.d2));
            }
            k => {
                for i in 0..k {
                    let (p, q) = (hull[i], hull[(i + 1) % k]);
                    let (a, b) = (q.d2 - p.d2, p.d1 - q.d1);
                    push(&mut cons, a, b, a * p.d1 + b * p.d2);
                }
            }
        }
        for axis in [1, 2] {
            let h = HalfPlane::nonneg(axis);
            if !cons.contains(&h) {
                cons.push(h);
            }
        }
        let mut vertices = hull;
        sort_ccw(&mut vertices);
        Ok(Polytope2D { constraints: cons, vertices })
    }

    pub fn constraints(&self) -> &[HalfPlane] {
        &self.constraints
    }

    pub fn vertices(&self) -> &[DofPoint] {
        &self.vertices
    }

    pub fn contains(&self, p: DofPoint) -> bool {
        self.constraints.iter().all(|h| h.satisfied(p))
    }

    pub fn is_vertex(&self, p: DofPoint) -> bool {
        self.vertices.contains(&p)
    }

    /// Set inclusion `self ⊆ other` (convexity: vertex check suffices).
    pub fn subset_of(&self, other: &Polytope2D) -> bool {
        self.vertices.iter().all(|v| other.contains(*v))
    }

    pub fn equals(&self, other: &Polytope2D) -> bool {
        self.subset_of(other) && other.subset_of(self)
    }

    pub fn intersect(&self, other: &Polytope2D) -> Result<Polytope2D, GeometryError> {
        let mut hs = self.constraints.clone();
        hs.extend_from_slice(&other.constraints);
        Polytope2D::from_halfplanes(&hs)
    }

    /// Maximum of `w1*d1 + w2*d2` over the polytope.
    pub fn max_linear(&self, w1: Rat, w2: Rat) -> Rat {
        self.vertices
            .iter()
            .map(|v| w1 * v.d1 + w2 * v.d2)
            .max()
            .expect("polytope has vertices")
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "constraints": self
                .constraints
                .iter()
                .map(|h| vec![rat_str(h.a), rat_str(h.b), rat_str(h.c)])
                .collect::<Vec<_>>(),
            "vertices": self
                .vertices
                .iter()
                .map(|v| vec![rat_str(v.d1), rat_str(v.d2)])
                .collect::<Vec<_>>(),
        })
    }
}

/// Render a rational as `num/den` (denominator always shown, reduced form).
pub fn rat_str(r: Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn sort_ccw(vertices: &mut [DofPoint]) {
    if vertices.len() < 3 {
        vertices.sort_by(|p, q| (p.d1, p.d2).cmp(&(q.d1, q.d2)));
        return;
    }
    let n = Rat::from_integer(vertices.len() as i64);
    let cx = vertices.iter().map(|v| v.d1).sum::<Rat>() / n;
    let cy = vertices.iter().map(|v| v.d2).sum::<Rat>() / n;
    let half = |v: &DofPoint| -> u8 {
        let (dx, dy) = (v.d1 - cx, v.d2 - cy);
        // Angle in [0, pi) -> 0, [pi, 2pi) -> 1, measured from +x axis.
        if dy > Rat::zero() || (dy.is_zero() && dx > Rat::zero()) {
            0
        } else {
            1
        }
    };
    vertices.sort_by(|p, q| {
        half(p).cmp(&half(q)).then_with(|| {
            let c = (p.d1 - cx) * (q.d2 - cy) - (p.d2 - cy) * (q.d1 - cx);
            // positive cross => p is angularly before q
            c.cmp(&Rat::zero()).reverse()
        })
    });
}
