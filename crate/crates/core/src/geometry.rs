//! Planar points, barycentric coordinates and the few predicates the
//! locators need.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

/// Acceptance tolerance for barycentric coordinates: a point is inside a
/// triangle when every coordinate is at least `-INSIDE_TOL`.
pub const INSIDE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    #[inline]
    pub fn dist2(self, other: Point2) -> f64 {
        let d = self - other;
        d.x * d.x + d.y * d.y
    }
}

impl Add for Point2 {
    type Output = Point2;
    #[inline]
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    #[inline]
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<Point2> for f64 {
    type Output = Point2;
    #[inline]
    fn mul(self, p: Point2) -> Point2 {
        Point2::new(self * p.x, self * p.y)
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((x, y): (f64, f64)) -> Self {
        Point2::new(x, y)
    }
}

/// Barycentric coordinates `(θ1, θ2, θ3)` of a point with respect to an
/// ordered vertex triple. `θ3` is always `1 − θ1 − θ2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Barycentric(pub [f64; 3]);

impl Barycentric {
    /// Closed-form coordinates of `p` with respect to `(x1, x2, x3)`.
    ///
    /// Returns `None` when the three vertices are collinear.
    #[inline]
    pub fn compute(x1: Point2, x2: Point2, x3: Point2, p: Point2) -> Option<Self> {
        let den = (x2.y - x3.y) * (x1.x - x3.x) + (x3.x - x2.x) * (x1.y - x3.y);
        if den == 0.0 || !den.is_finite() {
            return None;
        }
        let t1 = ((x2.y - x3.y) * (p.x - x3.x) + (x3.x - x2.x) * (p.y - x3.y)) / den;
        let t2 = ((x3.y - x1.y) * (p.x - x3.x) + (x1.x - x3.x) * (p.y - x3.y)) / den;
        Some(Barycentric([t1, t2, 1.0 - t1 - t2]))
    }

    #[inline]
    pub fn min(&self) -> f64 {
        self.0[0].min(self.0[1]).min(self.0[2])
    }

    /// Position of the smallest coordinate; ties go to the lowest position.
    #[inline]
    pub fn argmin(&self) -> usize {
        let [a, b, c] = self.0;
        if a <= b && a <= c {
            0
        } else if b <= c {
            1
        } else {
            2
        }
    }

    #[inline]
    pub fn is_inside(&self) -> bool {
        self.min() >= -INSIDE_TOL
    }

    /// Coordinates clamped to `[0, 1]`, used for interpolation weights.
    #[inline]
    pub fn clamped(&self) -> [f64; 3] {
        self.0.map(|t| t.clamp(0.0, 1.0))
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// `Σ θᵢ xᵢ`.
    pub fn reconstruct(&self, x: [Point2; 3]) -> Point2 {
        let [a, b, c] = self.0;
        Point2::new(
            a * x[0].x + b * x[1].x + c * x[2].x,
            a * x[0].y + b * x[1].y + c * x[2].y,
        )
    }
}

/// Twice the signed area of `(a, b, c)`; positive for counterclockwise order.
#[inline]
pub fn signed_area2(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Exact orientation predicate: positive when `(a, b, c)` turns left.
#[inline]
pub fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    robust::orient2d(coord(a), coord(b), coord(c))
}

/// Exact in-circle predicate: positive when `d` lies strictly inside the
/// circumcircle of the counterclockwise triangle `(a, b, c)`.
#[inline]
pub fn incircle(a: Point2, b: Point2, c: Point2, d: Point2) -> f64 {
    robust::incircle(coord(a), coord(b), coord(c), coord(d))
}

#[inline]
fn coord(p: Point2) -> robust::Coord<f64> {
    robust::Coord { x: p.x, y: p.y }
}

/// Axis-aligned closed rectangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub min: Point2,
    pub max: Point2,
}

impl Rect {
    pub fn new(min: Point2, max: Point2) -> Self {
        Rect { min, max }
    }

    pub fn bounding(points: &[Point2]) -> Option<Rect> {
        let first = *points.first()?;
        Some(points.iter().fold(Rect::new(first, first), |r, p| Rect {
            min: Point2::new(r.min.x.min(p.x), r.min.y.min(p.y)),
            max: Point2::new(r.max.x.max(p.x), r.max.y.max(p.y)),
        }))
    }

    #[inline]
    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn center(&self) -> Point2 {
        Point2::new(
            0.5 * (self.min.x + self.max.x),
            0.5 * (self.min.y + self.max.y),
        )
    }

    /// Quadrants in SW, SE, NW, NE order.
    pub fn quadrants(&self) -> [Rect; 4] {
        let c = self.center();
        [
            Rect::new(self.min, c),
            Rect::new(Point2::new(c.x, self.min.y), Point2::new(self.max.x, c.y)),
            Rect::new(Point2::new(self.min.x, c.y), Point2::new(c.x, self.max.y)),
            Rect::new(c, self.max),
        ]
    }

    /// Separating-axis test between this closed rectangle and a closed
    /// triangle. Touching counts as intersecting.
    pub fn intersects_triangle(&self, t: [Point2; 3]) -> bool {
        let tmin_x = t[0].x.min(t[1].x).min(t[2].x);
        let tmax_x = t[0].x.max(t[1].x).max(t[2].x);
        let tmin_y = t[0].y.min(t[1].y).min(t[2].y);
        let tmax_y = t[0].y.max(t[1].y).max(t[2].y);
        if tmax_x < self.min.x || tmin_x > self.max.x || tmax_y < self.min.y || tmin_y > self.max.y
        {
            return false;
        }
        let corners = [
            self.min,
            Point2::new(self.max.x, self.min.y),
            self.max,
            Point2::new(self.min.x, self.max.y),
        ];
        for k in 0..3 {
            let a = t[k];
            let b = t[(k + 1) % 3];
            let n = Point2::new(b.y - a.y, a.x - b.x);
            let proj = |p: Point2| n.x * p.x + n.y * p.y;
            let (mut tlo, mut thi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &v in &t {
                let s = proj(v);
                tlo = tlo.min(s);
                thi = thi.max(s);
            }
            let (mut rlo, mut rhi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &v in &corners {
                let s = proj(v);
                rlo = rlo.min(s);
                rhi = rhi.max(s);
            }
            if thi < rlo || tlo > rhi {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn tri() -> [Point2; 3] {
        [
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(0.0, 2.0),
        ]
    }

    #[test]
    fn vertex_has_unit_coordinates() {
        let [a, b, c] = tri();
        assert_eq!(Barycentric::compute(a, b, c, a).unwrap().0, [1.0, 0.0, 0.0]);
        assert_eq!(Barycentric::compute(a, b, c, b).unwrap().0, [0.0, 1.0, 0.0]);
        assert_eq!(Barycentric::compute(a, b, c, c).unwrap().0, [0.0, 0.0, 1.0]);
    }

    #[test]
    fn centroid_is_one_third() {
        let [a, b, c] = [
            Point2::new(0.3, -1.2),
            Point2::new(2.5, 0.1),
            Point2::new(-0.7, 1.9),
        ];
        let g = Point2::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0);
        let bc = Barycentric::compute(a, b, c, g).unwrap();
        for t in bc.0 {
            assert_abs_diff_eq!(t, 1.0 / 3.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn matches_direct_linear_solve() {
        // p = θ1 x1 + θ2 x2 + θ3 x3 with Σθ = 1, solved by Cramer's rule on
        // the 3x3 system [x1 x2 x3; y1 y2 y3; 1 1 1] θ = [px; py; 1].
        fn cramer(x: [Point2; 3], p: Point2) -> [f64; 3] {
            let m = [
                [x[0].x, x[1].x, x[2].x],
                [x[0].y, x[1].y, x[2].y],
                [1.0, 1.0, 1.0],
            ];
            let rhs = [p.x, p.y, 1.0];
            let det3 = |m: [[f64; 3]; 3]| {
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                    - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            };
            let d = det3(m);
            let mut out = [0.0; 3];
            for (k, o) in out.iter_mut().enumerate() {
                let mut mk = m;
                for r in 0..3 {
                    mk[r][k] = rhs[r];
                }
                *o = det3(mk) / d;
            }
            out
        }
        let x = tri();
        let p = Point2::new(0.5, 0.5);
        let expected = cramer(x, p);
        assert_eq!(expected, [0.5, 0.25, 0.25]);
        let bc = Barycentric::compute(x[0], x[1], x[2], p).unwrap();
        for k in 0..3 {
            assert_abs_diff_eq!(bc.0[k], expected[k], epsilon = 1e-15);
        }
    }

    #[test]
    fn degenerate_triangle_is_rejected() {
        let a = Point2::new(0.0, 0.0);
        let b = Point2::new(1.0, 1.0);
        let c = Point2::new(2.0, 2.0);
        assert!(Barycentric::compute(a, b, c, Point2::new(0.5, 0.0)).is_none());
    }

    #[test]
    fn argmin_ties_pick_lowest_position() {
        assert_eq!(Barycentric([-1.0, -1.0, 3.0]).argmin(), 0);
        assert_eq!(Barycentric([0.5, -1.0, -1.0]).argmin(), 1);
        assert_eq!(Barycentric([0.5, 0.5, -0.0]).argmin(), 2);
    }

    #[test]
    fn rect_triangle_touching_counts() {
        let r = Rect::new(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0));
        let touching = [
            Point2::new(1.0, 1.0),
            Point2::new(2.0, 1.0),
            Point2::new(2.0, 2.0),
        ];
        assert!(r.intersects_triangle(touching));
        // Bounding boxes overlap, but the edge x + y = 3.6 separates them.
        assert!(!r.intersects_triangle([
            Point2::new(2.5, 1.5),
            Point2::new(3.0, 0.6),
            Point2::new(0.6, 3.0)
        ]));
        // Rectangle corner (1, 1) lies on the edge 2x + y = 3.
        assert!(r.intersects_triangle([
            Point2::new(1.5, 0.0),
            Point2::new(3.0, 0.0),
            Point2::new(0.0, 3.0)
        ]));
    }

    fn pt() -> impl Strategy<Value = Point2> {
        (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, y)| Point2::new(x, y))
    }

    proptest! {
        #[test]
        fn partition_of_unity_and_reconstruction(a in pt(), b in pt(), c in pt(), p in pt()) {
            let area = signed_area2(a, b, c).abs();
            prop_assume!(area > 1e-2);
            let bc = Barycentric::compute(a, b, c, p).unwrap();
            prop_assert_eq!(bc.0[2], 1.0 - bc.0[0] - bc.0[1]);
            prop_assert!((bc.sum() - 1.0).abs() <= 1e-12);
            let q = bc.reconstruct([a, b, c]);
            // Scale of the configuration stands in for the mesh length scale.
            let scale = 20.0 * (1.0 + bc.0.iter().map(|t| t.abs()).fold(0.0, f64::max));
            prop_assert!(q.dist(p) <= 1e-13 * scale, "{:?} vs {:?}", q, p);
        }

        #[test]
        fn affine_invariance(a in pt(), b in pt(), c in pt(), p in pt(),
                             m in prop::array::uniform4(-3.0..3.0f64), t in pt()) {
            prop_assume!(signed_area2(a, b, c).abs() > 1e-1);
            let det = m[0] * m[3] - m[1] * m[2];
            prop_assume!(det.abs() > 1e-1);
            let f = |q: Point2| Point2::new(m[0] * q.x + m[1] * q.y + t.x, m[2] * q.x + m[3] * q.y + t.y);
            let before = Barycentric::compute(a, b, c, p).unwrap();
            let after = Barycentric::compute(f(a), f(b), f(c), f(p)).unwrap();
            let mag = 1.0 + before.0.iter().map(|t| t.abs()).fold(0.0, f64::max);
            for k in 0..3 {
                prop_assert!((before.0[k] - after.0[k]).abs() <= 1e-10 * mag);
            }
        }
    }
}
