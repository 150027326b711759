use super::polyline::bounding_box;
use super::{segment_intersection, Vec2, EPS};
use crate::error::{Error, Result};

/// A closed ring of at least three distinct vertices. The closing edge is
/// implicit; a repeated first vertex at the end is dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    ring: Vec<Vec2>,
    lo: Vec2,
    hi: Vec2,
}

impl Polygon {
    pub fn new(points: impl IntoIterator<Item = Vec2>) -> Result<Self> {
        let mut ring: Vec<Vec2> = Vec::new();
        for p in points {
            if ring.last().is_none_or(|l: &Vec2| l.distance(p) > EPS) {
                ring.push(p);
            }
        }
        while ring.len() > 1 && ring[0].distance(ring[ring.len() - 1]) <= EPS {
            ring.pop();
        }
        if ring.len() < 3 {
            return Err(Error::Geometry(format!(
                "polygon needs at least 3 distinct vertices, got {}",
                ring.len()
            )));
        }
        let (lo, hi) = bounding_box(&ring);
        Ok(Self { ring, lo, hi })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.ring
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.ring.len();
        (0..n).map(move |i| (self.ring[i], self.ring[(i + 1) % n]))
    }

    pub fn bounds(&self) -> (Vec2, Vec2) {
        (self.lo, self.hi)
    }

    fn on_boundary(&self, q: Vec2) -> bool {
        self.edges().any(|(a, b)| point_segment_distance(q, a, b) <= EPS)
    }

    /// Even-odd containment; points on the boundary count as inside.
    pub fn contains(&self, q: Vec2) -> bool {
        if q.x < self.lo.x - EPS || q.x > self.hi.x + EPS || q.y < self.lo.y - EPS || q.y > self.hi.y + EPS {
            return false;
        }
        if self.on_boundary(q) {
            return true;
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > q.y) != (b.y > q.y) {
                let x = a.x + (q.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if q.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

fn point_segment_distance(q: Vec2, a: Vec2, b: Vec2) -> f64 {
    let d = b - a;
    let len2 = d.norm_squared();
    if len2 == 0.0 {
        return q.distance(a);
    }
    let t = ((q - a).dot(d) / len2).clamp(0.0, 1.0);
    q.distance(a + d * t)
}

/// Corners of an oriented rectangle in counter-clockwise order. `length` runs
/// along `orientation`, `width` across it.
pub fn rectangle_corners(center: Vec2, orientation: f64, length: f64, width: f64) -> [Vec2; 4] {
    let fwd = Vec2::from_angle(orientation) * (0.5 * length);
    let left = Vec2::from_angle(orientation + std::f64::consts::FRAC_PI_2) * (0.5 * width);
    [
        center - fwd - left,
        center + fwd - left,
        center + fwd + left,
        center - fwd + left,
    ]
}

/// True iff the oriented rectangle and the polygon share any point.
pub fn rectangle_polygon_overlap(
    center: Vec2,
    orientation: f64,
    length: f64,
    width: f64,
    polygon: &Polygon,
) -> bool {
    let corners = rectangle_corners(center, orientation, length, width);
    let (rlo, rhi) = bounding_box(&corners);
    let (plo, phi) = polygon.bounds();
    if rlo.x > phi.x + EPS || plo.x > rhi.x + EPS || rlo.y > phi.y + EPS || plo.y > rhi.y + EPS {
        return false;
    }
    if corners.iter().any(|&c| polygon.contains(c)) {
        return true;
    }
    let rect = Polygon::new(corners).expect("rectangle with positive extent");
    if polygon.vertices().iter().any(|&v| rect.contains(v)) {
        return true;
    }
    let crossing = rect
        .edges()
        .any(|(a, b)| polygon.edges().any(|(c, d)| segment_intersection(a, b, c, d).is_some()));
    crossing
}
