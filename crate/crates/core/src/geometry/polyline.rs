use serde::{Deserialize, Serialize};

use super::{Vec2, EPS};
use crate::error::{Error, Result};

/// Orthogonal projection of a point onto a polyline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArclengthProjection {
    /// Distance along the polyline from its first vertex.
    pub arclength: f64,
    pub foot_point: Vec2,
    /// Direction of the segment that contains the foot point.
    pub tangent_orientation: f64,
    /// Distance to the foot point, positive left of the direction of travel.
    pub signed_lateral: f64,
}

impl ArclengthProjection {
    pub fn distance(&self) -> f64 {
        self.signed_lateral.abs()
    }
}

/// An ordered sequence of at least two distinct consecutive vertices.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec2>", into = "Vec<Vec2>")]
pub struct Polyline {
    points: Vec<Vec2>,
    cumulative: Vec<f64>,
}

impl PartialEq for Polyline {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points
    }
}

impl TryFrom<Vec<Vec2>> for Polyline {
    type Error = Error;

    fn try_from(points: Vec<Vec2>) -> Result<Self> {
        Polyline::new(points)
    }
}

impl From<Polyline> for Vec<Vec2> {
    fn from(p: Polyline) -> Self {
        p.points
    }
}

impl Polyline {
    pub fn new(points: Vec<Vec2>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Geometry(format!(
                "polyline needs at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::Geometry(format!("non-finite polyline vertex {p:?}")));
        }
        let mut cumulative = Vec::with_capacity(points.len());
        cumulative.push(0.0);
        for (i, w) in points.windows(2).enumerate() {
            let d = w[0].distance(w[1]);
            if d <= EPS {
                return Err(Error::Geometry(format!(
                    "polyline vertices {i} and {} coincide at ({}, {})",
                    i + 1,
                    w[0].x,
                    w[0].y
                )));
            }
            cumulative.push(cumulative[i] + d);
        }
        Ok(Self { points, cumulative })
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> Vec2 {
        self.points[0]
    }

    pub fn last(&self) -> Vec2 {
        self.points[self.points.len() - 1]
    }

    /// Arclength of every vertex, starting at 0.
    pub fn arclengths(&self) -> &[f64] {
        &self.cumulative
    }

    /// Sum of Euclidean segment lengths.
    pub fn length(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1]
    }

    pub fn segment_count(&self) -> usize {
        self.points.len() - 1
    }

    pub fn segment(&self, i: usize) -> (Vec2, Vec2) {
        (self.points[i], self.points[i + 1])
    }

    /// Direction of the first segment.
    pub fn initial_orientation(&self) -> f64 {
        (self.points[1] - self.points[0]).angle()
    }

    /// Global closest point over all segments. Exact ties go to the smaller arclength.
    pub fn project(&self, q: Vec2) -> ArclengthProjection {
        let mut best_dist = f64::INFINITY;
        let mut best = (0usize, 0.0f64, self.points[0]);
        for i in 0..self.segment_count() {
            let (a, b) = self.segment(i);
            let d = b - a;
            let t = ((q - a).dot(d) / d.norm_squared()).clamp(0.0, 1.0);
            let foot = a + d * t;
            let dist = q.distance(foot);
            if dist < best_dist - 1e-12 {
                best_dist = dist;
                best = (i, t, foot);
            }
        }
        let (i, t, foot) = best;
        let (a, b) = self.segment(i);
        let dir = b - a;
        let seg_len = self.cumulative[i + 1] - self.cumulative[i];
        let side = dir.cross(q - foot);
        let signed_lateral = if side < 0.0 { -best_dist } else { best_dist };
        ArclengthProjection {
            arclength: (self.cumulative[i] + t * seg_len).min(self.length()),
            foot_point: foot,
            tangent_orientation: dir.angle(),
            signed_lateral,
        }
    }

    /// Index of the segment containing arclength `s` (clamped).
    fn segment_at(&self, s: f64) -> usize {
        let idx = self.cumulative.partition_point(|&c| c <= s);
        idx.saturating_sub(1).min(self.segment_count() - 1)
    }

    /// Position and segment direction at arclength `s`, clamped to `[0, length]`.
    pub fn point_at(&self, s: f64) -> (Vec2, f64) {
        let s = s.clamp(0.0, self.length());
        let i = self.segment_at(s);
        let (a, b) = self.segment(i);
        let seg_len = self.cumulative[i + 1] - self.cumulative[i];
        let t = ((s - self.cumulative[i]) / seg_len).clamp(0.0, 1.0);
        (a.lerp(b, t), (b - a).angle())
    }

    /// Vertices of the sub-polyline between two arclengths, including both
    /// interpolated endpoints. Interior vertices closer than `EPS` to an
    /// endpoint are dropped.
    pub fn slice_points(&self, s0: f64, s1: f64) -> Vec<Vec2> {
        let (s0, s1) = (s0.clamp(0.0, self.length()), s1.clamp(0.0, self.length()));
        let mut out = vec![self.point_at(s0).0];
        for (p, &c) in self.points.iter().zip(&self.cumulative) {
            if c > s0 + EPS && c < s1 - EPS {
                out.push(*p);
            }
        }
        out.push(self.point_at(s1).0);
        out
    }

    /// `n >= 2` points at uniform arclength spacing, endpoints included.
    pub fn resample(&self, n: usize) -> Vec<Vec2> {
        assert!(n >= 2, "resampling needs at least two points");
        let step = self.length() / (n - 1) as f64;
        (0..n)
            .map(|k| {
                if k == n - 1 {
                    self.last()
                } else {
                    self.point_at(step * k as f64).0
                }
            })
            .collect()
    }

    pub fn map_points(&self, f: impl Fn(Vec2) -> Vec2) -> Result<Polyline> {
        Polyline::new(self.points.iter().copied().map(f).collect())
    }

    pub fn reversed(&self) -> Polyline {
        let mut pts = self.points.clone();
        pts.reverse();
        Polyline::new(pts).expect("reversal preserves validity")
    }

    /// Axis-aligned bounding box as (min, max).
    pub fn bounds(&self) -> (Vec2, Vec2) {
        bounding_box(&self.points)
    }
}

pub(crate) fn bounding_box(points: &[Vec2]) -> (Vec2, Vec2) {
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    fn pl(pts: &[(f64, f64)]) -> Polyline {
        Polyline::new(pts.iter().map(|&p| p.into()).collect()).unwrap()
    }

    #[test]
    fn length_of_three_four_path() {
        assert_eq!(pl(&[(0.0, 0.0), (3.0, 0.0), (3.0, 4.0)]).length(), 7.0);
        assert!((pl(&[(0.0, 0.0), (1.0, 1.0)]).length() - SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn rejects_short_and_degenerate() {
        assert!(matches!(Polyline::new(vec![Vec2::ZERO]), Err(Error::Geometry(_))));
        assert!(Polyline::new(vec![Vec2::ZERO, Vec2::ZERO]).is_err());
    }

    #[test]
    fn project_axis_aligned() {
        let p = pl(&[(0.0, 0.0), (10.0, 0.0)]);
        let pr = p.project(Vec2::new(4.0, 2.0));
        assert_eq!(pr.arclength, 4.0);
        assert_eq!(pr.foot_point, Vec2::new(4.0, 0.0));
        assert_eq!(pr.tangent_orientation, 0.0);
        assert_eq!(pr.signed_lateral, 2.0);
        let pr = p.project(Vec2::new(4.0, -2.0));
        assert_eq!(pr.signed_lateral, -2.0);
    }

    #[test]
    fn project_clamps_before_start() {
        let p = pl(&[(0.0, 0.0), (10.0, 0.0)]);
        let pr = p.project(Vec2::new(-3.0, 1.0));
        assert_eq!(pr.arclength, 0.0);
        assert_eq!(pr.foot_point, Vec2::ZERO);
    }

    #[test]
    fn project_tie_prefers_smaller_arclength() {
        // (5,5) is 5 m from both legs of the L.
        let p = pl(&[(0.0, 0.0), (10.0, 0.0), (10.0, 10.0)]);
        let pr = p.project(Vec2::new(5.0, 5.0));
        assert_eq!(pr.arclength, 5.0);
        assert_eq!(pr.tangent_orientation, 0.0);
    }

    #[test]
    fn point_at_interior_and_end() {
        let p = pl(&[(0.0, 0.0), (10.0, 0.0)]);
        assert_eq!(p.point_at(2.5), (Vec2::new(2.5, 0.0), 0.0));
        let q = pl(&[(0.0, 0.0), (10.0, 0.0), (10.0, 5.0)]);
        let (pt, th) = q.point_at(q.length());
        assert_eq!(pt, Vec2::new(10.0, 5.0));
        assert!((th - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(q.point_at(100.0).0, Vec2::new(10.0, 5.0));
        assert_eq!(q.point_at(-1.0).0, Vec2::ZERO);
    }

    #[test]
    fn resample_endpoints() {
        let p = pl(&[(0.0, 0.0), (10.0, 0.0), (10.0, 10.0)]);
        let r = p.resample(5);
        assert_eq!(r[0], Vec2::ZERO);
        assert_eq!(r[2], Vec2::new(10.0, 0.0));
        assert_eq!(r[4], Vec2::new(10.0, 10.0));
    }

    fn arb_polyline() -> impl Strategy<Value = Polyline> {
        prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 2..12).prop_filter_map(
            "distinct consecutive vertices",
            |pts| Polyline::new(pts.into_iter().map(Vec2::from).collect()).ok(),
        )
    }

    proptest! {
        #[test]
        fn length_is_segment_hypot_sum(p in arb_polyline()) {
            let expected: f64 = p.points().windows(2)
                .map(|w| ((w[1].x - w[0].x).powi(2) + (w[1].y - w[0].y).powi(2)).sqrt())
                .sum();
            prop_assert!((p.length() - expected).abs() <= 1e-9 * expected.max(1.0));
        }

        #[test]
        fn projection_beats_every_vertex(p in arb_polyline(), qx in -60.0..60.0f64, qy in -60.0..60.0f64) {
            let q = Vec2::new(qx, qy);
            let pr = p.project(q);
            for v in p.points() {
                prop_assert!(pr.distance() <= q.distance(*v) + 1e-9);
            }
            prop_assert!(pr.arclength >= 0.0 && pr.arclength <= p.length());
        }

        #[test]
        fn point_at_then_project_recovers_arclength(p in arb_polyline(), frac in 0.0..1.0f64) {
            let s = frac * p.length();
            let (pt, _) = p.point_at(s);
            let back = p.project(pt);
            // Self-crossing polylines may have another branch through `pt`.
            prop_assert!(back.distance() < 1e-6);
            if back.arclength > s + 1e-6 || back.arclength < s - 1e-6 {
                let (other, _) = p.point_at(back.arclength);
                prop_assert!(other.distance(pt) < 1e-6);
            }
        }

        #[test]
        fn length_invariant_under_rigid_motion(p in arb_polyline(), angle in -3.2..3.2f64, tx in -1e3..1e3f64, ty in -1e3..1e3f64) {
            let moved = p.map_points(|v| v.rotate(angle) + Vec2::new(tx, ty)).unwrap();
            prop_assert!((moved.length() - p.length()).abs() <= 1e-9 * p.length().max(1.0) * 10.0);
        }
    }
}
