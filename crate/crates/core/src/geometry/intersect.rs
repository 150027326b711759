use super::polyline::bounding_box;
use super::{Polyline, Vec2, EPS};

/// A crossing between two polylines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intersection {
    pub arclength_a: f64,
    pub arclength_b: f64,
    pub point: Vec2,
}

/// Intersection of closed segments `p0p1` and `q0q1` as parameters `(t, u)`
/// on each segment. Collinear overlaps yield the midpoint of the overlap.
pub fn segment_intersection(p0: Vec2, p1: Vec2, q0: Vec2, q1: Vec2) -> Option<(f64, f64)> {
    let r = p1 - p0;
    let s = q1 - q0;
    let qp = q0 - p0;
    let denom = r.cross(s);
    let scale = r.norm() * s.norm();
    if denom.abs() > 1e-12 * scale {
        let t = qp.cross(s) / denom;
        let u = qp.cross(r) / denom;
        let tol = 1e-12;
        if (-tol..=1.0 + tol).contains(&t) && (-tol..=1.0 + tol).contains(&u) {
            return Some((t.clamp(0.0, 1.0), u.clamp(0.0, 1.0)));
        }
        return None;
    }
    // Parallel: only collinear overlaps intersect.
    if qp.cross(r).abs() > EPS * r.norm() {
        return None;
    }
    let rr = r.norm_squared();
    let t0 = qp.dot(r) / rr;
    let t1 = (q1 - p0).dot(r) / rr;
    let lo = t0.min(t1).max(0.0);
    let hi = t0.max(t1).min(1.0);
    if lo > hi + 1e-12 {
        return None;
    }
    let tm = 0.5 * (lo + hi.max(lo));
    let pm = p0 + r * tm;
    let u = ((pm - q0).dot(s) / s.norm_squared()).clamp(0.0, 1.0);
    Some((tm, u))
}

/// All crossings of `a` with `b`, sorted by arclength on `a`. Hits that
/// coincide on both polylines (shared segment endpoints) are reported once.
pub fn polyline_intersection(a: &Polyline, b: &Polyline) -> Vec<Intersection> {
    let (alo, ahi) = a.bounds();
    let (blo, bhi) = b.bounds();
    if alo.x > bhi.x + EPS || blo.x > ahi.x + EPS || alo.y > bhi.y + EPS || blo.y > ahi.y + EPS {
        return Vec::new();
    }
    let sa = a.arclengths();
    let sb = b.arclengths();
    let mut hits = Vec::new();
    for i in 0..a.segment_count() {
        let (p0, p1) = a.segment(i);
        let (plo, phi) = bounding_box(&[p0, p1]);
        for j in 0..b.segment_count() {
            let (q0, q1) = b.segment(j);
            let (qlo, qhi) = bounding_box(&[q0, q1]);
            if plo.x > qhi.x + EPS || qlo.x > phi.x + EPS || plo.y > qhi.y + EPS || qlo.y > phi.y + EPS {
                continue;
            }
            if let Some((t, u)) = segment_intersection(p0, p1, q0, q1) {
                hits.push(Intersection {
                    arclength_a: sa[i] + t * (sa[i + 1] - sa[i]),
                    arclength_b: sb[j] + u * (sb[j + 1] - sb[j]),
                    point: p0.lerp(p1, t),
                });
            }
        }
    }
    hits.sort_by(|x, y| {
        x.arclength_a
            .total_cmp(&y.arclength_a)
            .then(x.arclength_b.total_cmp(&y.arclength_b))
    });
    hits.dedup_by(|x, y| {
        (x.arclength_a - y.arclength_a).abs() <= EPS && (x.arclength_b - y.arclength_b).abs() <= EPS
    });
    hits
}
