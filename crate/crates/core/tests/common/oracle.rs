//! Reference implementations used to cross-check the library. They favor
//! obviousness over speed and share no code with the crate under test.

use std::collections::BTreeSet;

// ---------------------------------------------------------------------------
// Delaunay: brute-force empty circumcircle test in exact integer arithmetic.

fn det3(m: [[i128; 3]; 3]) -> i128 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn det4(m: [[i128; 4]; 4]) -> i128 {
    let mut total = 0;
    for col in 0..4 {
        let mut minor = [[0i128; 3]; 3];
        for r in 1..4 {
            let mut k = 0;
            for c in 0..4 {
                if c != col {
                    minor[r - 1][k] = m[r][c];
                    k += 1;
                }
            }
        }
        let sign = if col % 2 == 0 { 1 } else { -1 };
        total += sign * m[0][col] * det3(minor);
    }
    total
}

pub fn orient(p: (i64, i64), q: (i64, i64), r: (i64, i64)) -> i128 {
    det3([
        [p.0 as i128, p.1 as i128, 1],
        [q.0 as i128, q.1 as i128, 1],
        [r.0 as i128, r.1 as i128, 1],
    ])
}

/// Whether `d` is strictly inside the circumcircle of triangle `tri` once the
/// lift of point `i` is raised by `ε^(i+1)`.
fn perturbed_inside(pts: &[(i64, i64)], tri: [usize; 3], d: usize) -> bool {
    let rows = [tri[0], tri[1], tri[2], d];
    let lift = |i: usize| {
        let (x, y) = (pts[i].0 as i128, pts[i].1 as i128);
        x * x + y * y
    };
    let matrix = |lifts: [i128; 4]| {
        let mut m = [[0i128; 4]; 4];
        for (r, &i) in rows.iter().enumerate() {
            m[r] = [pts[i].0 as i128, pts[i].1 as i128, lifts[r], 1];
        }
        m
    };
    let o = orient(pts[tri[0]], pts[tri[1]], pts[tri[2]]).signum();
    let base = det4(matrix(rows.map(lift)));
    if base != 0 {
        return base.signum() * o > 0;
    }
    // The determinant is linear in each lift: its ε-expansion coefficients
    // are the determinants with the lift column replaced by a unit vector.
    let mut by_rank: Vec<usize> = (0..4).collect();
    by_rank.sort_by_key(|&r| rows[r]);
    for r in by_rank {
        let mut unit = [0i128; 4];
        unit[r] = 1;
        let c = det4(matrix(unit));
        if c != 0 {
            return c.signum() * o > 0;
        }
    }
    false
}

/// Undirected Delaunay edges of distinct integer points, at least one triple
/// non-collinear.
pub fn delaunay_edges(pts: &[(i64, i64)]) -> BTreeSet<(usize, usize)> {
    let n = pts.len();
    let mut edges = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if orient(pts[i], pts[j], pts[k]) == 0 {
                    continue;
                }
                let empty = (0..n).filter(|m| ![i, j, k].contains(m)).all(|m| !perturbed_inside(pts, [i, j, k], m));
                if empty {
                    edges.extend([(i, j), (i, k), (j, k)]);
                }
            }
        }
    }
    edges
}

// ---------------------------------------------------------------------------
// Projection: dense sampling, then refinement inside the winning cell.

pub const SAMPLE_STEP: f64 = 1e-4;

fn seg_dist(a: (f64, f64), b: (f64, f64), t: f64, q: (f64, f64)) -> f64 {
    let x = a.0 + (b.0 - a.0) * t;
    let y = a.1 + (b.1 - a.1) * t;
    ((x - q.0).powi(2) + (y - q.1).powi(2)).sqrt()
}

/// Distance from `q` to the polyline through `pts`.
pub fn dense_distance(pts: &[(f64, f64)], q: (f64, f64)) -> f64 {
    let mut best = f64::INFINITY;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
        let n = (len / SAMPLE_STEP).ceil().max(1.0) as usize;
        let mut k_best = 0;
        let mut d_best = f64::INFINITY;
        for k in 0..=n {
            let d = seg_dist(a, b, k as f64 / n as f64, q);
            if d < d_best {
                d_best = d;
                k_best = k;
            }
        }
        // Distance along a straight segment is convex: ternary search the cell.
        let mut lo = k_best.saturating_sub(1) as f64 / n as f64;
        let mut hi = (k_best + 1).min(n) as f64 / n as f64;
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if seg_dist(a, b, m1, q) <= seg_dist(a, b, m2, q) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        best = best.min(d_best).min(seg_dist(a, b, 0.5 * (lo + hi), q));
    }
    best
}

// ---------------------------------------------------------------------------
// Segment crossings: straddle tests for existence, Cramer's rule for location.

fn orient_f(p: (f64, f64), q: (f64, f64), r: (f64, f64)) -> f64 {
    (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0)
}

/// Crossing point of two segments in general position.
pub fn crossing(p0: (f64, f64), p1: (f64, f64), q0: (f64, f64), q1: (f64, f64)) -> Option<(f64, f64)> {
    let d1 = orient_f(q0, q1, p0);
    let d2 = orient_f(q0, q1, p1);
    let d3 = orient_f(p0, p1, q0);
    let d4 = orient_f(p0, p1, q1);
    if d1 * d2 > 0.0 || d3 * d4 > 0.0 {
        return None;
    }
    // a1 x + b1 y = c1, a2 x + b2 y = c2
    let (a1, b1) = (p1.1 - p0.1, p0.0 - p1.0);
    let c1 = a1 * p0.0 + b1 * p0.1;
    let (a2, b2) = (q1.1 - q0.1, q0.0 - q1.0);
    let c2 = a2 * q0.0 + b2 * q0.1;
    let det = a1 * b2 - a2 * b1;
    if det == 0.0 {
        return None;
    }
    Some(((c1 * b2 - c2 * b1) / det, (a1 * c2 - a2 * c1) / det))
}

/// All crossing points between two polylines, in order along `a`.
pub fn crossings(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for wa in a.windows(2) {
        let mut here: Vec<(f64, f64)> =
            b.windows(2).filter_map(|wb| crossing(wa[0], wa[1], wb[0], wb[1])).collect();
        let d = |p: &(f64, f64)| (p.0 - wa[0].0).hypot(p.1 - wa[0].1);
        here.sort_by(|x, y| d(x).total_cmp(&d(y)));
        out.extend(here);
    }
    out
}

// ---------------------------------------------------------------------------
// Regions: winding-number containment and sampled overlap.

/// Nonzero winding number test; boundary points count as inside.
pub fn winding_contains(poly: &[(f64, f64)], q: (f64, f64)) -> bool {
    let n = poly.len();
    let mut wn = 0i32;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let o = orient_f(a, b, q);
        let on_seg = o.abs() <= 1e-12 * (1.0 + (b.0 - a.0).hypot(b.1 - a.1))
            && q.0 >= a.0.min(b.0) - 1e-12
            && q.0 <= a.0.max(b.0) + 1e-12
            && q.1 >= a.1.min(b.1) - 1e-12
            && q.1 <= a.1.max(b.1) + 1e-12;
        if on_seg {
            return true;
        }
        if a.1 <= q.1 {
            if b.1 > q.1 && o > 0.0 {
                wn += 1;
            }
        } else if b.1 <= q.1 && o < 0.0 {
            wn -= 1;
        }
    }
    wn != 0
}

pub struct Rect {
    pub center: (f64, f64),
    pub orientation: f64,
    pub length: f64,
    pub width: f64,
}

impl Rect {
    fn at(&self, u: f64, v: f64) -> (f64, f64) {
        let (s, c) = self.orientation.sin_cos();
        let (x, y) = (u * 0.5 * self.length, v * 0.5 * self.width);
        (self.center.0 + c * x - s * y, self.center.1 + s * x + c * y)
    }

    pub fn contains(&self, q: (f64, f64)) -> bool {
        let (s, c) = self.orientation.sin_cos();
        let (dx, dy) = (q.0 - self.center.0, q.1 - self.center.1);
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        u.abs() <= 0.5 * self.length + 1e-12 && v.abs() <= 0.5 * self.width + 1e-12
    }
}

/// Monte Carlo plus boundary sampling: true iff some sample lies in both regions.
pub fn sampled_overlap(rect: &Rect, poly: &[(f64, f64)], interior: usize, step: f64) -> bool {
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    for _ in 0..interior {
        let (u, v) = (next(), next());
        if winding_contains(poly, rect.at(u, v)) {
            return true;
        }
    }
    let corners = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
    for i in 0..4 {
        let (a, b) = (rect.at(corners[i].0, corners[i].1), rect.at(corners[(i + 1) % 4].0, corners[(i + 1) % 4].1));
        let n = ((b.0 - a.0).hypot(b.1 - a.1) / step).ceil() as usize;
        for k in 0..=n {
            let t = k as f64 / n as f64;
            if winding_contains(poly, (a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t)) {
                return true;
            }
        }
    }
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let n = ((b.0 - a.0).hypot(b.1 - a.1) / step).ceil().max(1.0) as usize;
        for k in 0..=n {
            let t = k as f64 / n as f64;
            if rect.contains((a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t)) {
                return true;
            }
        }
    }
    false
}
