//! Delaunay neighborhoods via sweep triangulation plus Lawson flips.
//!
//! Orientation and in-circle signs are exact (adaptive predicates). Cocircular
//! configurations are resolved by symbolically raising the paraboloid lift of
//! point `i` by `ε^(i+1)`, so the point with the smallest input index decides
//! a zero in-circle determinant. The result is the unique regular
//! triangulation for that perturbation.

use std::collections::{BTreeSet, HashMap};

use robust::{incircle, orient2d, Coord};

use super::Vec2;

#[inline]
fn coord(p: Vec2) -> Coord<f64> {
    Coord { x: p.x, y: p.y }
}

struct Predicates<'a> {
    pts: &'a [Vec2],
}

impl Predicates<'_> {
    fn orient(&self, a: usize, b: usize, c: usize) -> f64 {
        orient2d(coord(self.pts[a]), coord(self.pts[b]), coord(self.pts[c]))
    }

    /// Whether `d` lies strictly inside the circumcircle of counter-clockwise
    /// triangle `abc` under the symbolic perturbation.
    fn in_circle(&self, a: usize, b: usize, c: usize, d: usize) -> bool {
        let det = incircle(
            coord(self.pts[a]),
            coord(self.pts[b]),
            coord(self.pts[c]),
            coord(self.pts[d]),
        );
        if det != 0.0 {
            return det > 0.0;
        }
        // Derivative of the lifted 4x4 determinant w.r.t. each lift, in
        // increasing perturbation order.
        let mut terms = [
            (a, self.orient(b, c, d)),
            (b, -self.orient(a, c, d)),
            (c, self.orient(a, b, d)),
            (d, -self.orient(a, b, c)),
        ];
        terms.sort_by_key(|&(i, _)| i);
        for (_, coeff) in terms {
            if coeff != 0.0 {
                return coeff > 0.0;
            }
        }
        false
    }
}

/// Undirected edges `(i, j)`, `i < j`, of the Delaunay triangulation of
/// `points`. Fewer than three distinct points yield the complete graph, all
/// collinear points a path along the line. Duplicate points share the
/// neighborhoods of their representative and are connected to each other.
pub fn delaunay_neighbors(points: &[Vec2]) -> Vec<(usize, usize)> {
    let n = points.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        points[i]
            .x
            .total_cmp(&points[j].x)
            .then(points[i].y.total_cmp(&points[j].y))
            .then(i.cmp(&j))
    });
    // groups[k] = input indices sharing the k-th distinct location (sorted).
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match groups.last_mut() {
            Some(g) if points[g[0]] == points[i] => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    // Representatives keep their original index for perturbation ranks;
    // `reps` is in lexicographic order.
    let reps: Vec<usize> = groups.iter().map(|g| g[0]).collect();

    let rep_edges: BTreeSet<(usize, usize)> = if reps.len() < 3 {
        complete(&reps)
    } else {
        let pred = Predicates { pts: points };
        let first_off_line = (2..reps.len()).find(|&k| pred.orient(reps[0], reps[1], reps[k]) != 0.0);
        match first_off_line {
            None => reps.windows(2).map(|w| ordered(w[0], w[1])).collect(),
            Some(m) => triangulate(&pred, &reps, m),
        }
    };

    let rep_group: HashMap<usize, &Vec<usize>> = groups.iter().map(|g| (g[0], g)).collect();
    let mut out = BTreeSet::new();
    for (a, b) in rep_edges {
        for &i in rep_group[&a] {
            for &j in rep_group[&b] {
                out.insert(ordered(i, j));
            }
        }
    }
    for g in &groups {
        out.extend(complete(g));
    }
    out.into_iter().collect()
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn complete(idx: &[usize]) -> BTreeSet<(usize, usize)> {
    let mut s = BTreeSet::new();
    for (k, &a) in idx.iter().enumerate() {
        for &b in &idx[k + 1..] {
            s.insert(ordered(a, b));
        }
    }
    s
}

struct Mesh {
    tris: Vec<[usize; 3]>,
    half_edges: HashMap<(usize, usize), usize>,
}

impl Mesh {
    fn add(&mut self, t: [usize; 3]) -> usize {
        let id = self.tris.len();
        self.tris.push(t);
        self.link(id);
        id
    }

    fn link(&mut self, id: usize) {
        let [a, b, c] = self.tris[id];
        for e in [(a, b), (b, c), (c, a)] {
            self.half_edges.insert(e, id);
        }
    }

    fn unlink(&mut self, id: usize) {
        let [a, b, c] = self.tris[id];
        for e in [(a, b), (b, c), (c, a)] {
            self.half_edges.remove(&e);
        }
    }

    fn apex(&self, id: usize, a: usize, b: usize) -> usize {
        let t = self.tris[id];
        *t.iter().find(|&&v| v != a && v != b).expect("triangle has three vertices")
    }
}

/// `reps` sorted lexicographically; `reps[..m]` collinear, `reps[m]` off the line.
fn triangulate(pred: &Predicates<'_>, reps: &[usize], m: usize) -> BTreeSet<(usize, usize)> {
    let mut mesh = Mesh { tris: Vec::new(), half_edges: HashMap::new() };
    let apex = reps[m];
    let left = pred.orient(reps[0], reps[1], apex) > 0.0;
    for w in reps[..m].windows(2) {
        if left {
            mesh.add([w[0], w[1], apex]);
        } else {
            mesh.add([w[1], w[0], apex]);
        }
    }
    // Counter-clockwise hull.
    let mut hull: Vec<usize> = if left {
        reps[..=m].to_vec()
    } else {
        std::iter::once(reps[0])
            .chain(std::iter::once(apex))
            .chain(reps[1..m].iter().rev().copied())
            .collect()
    };

    for &p in &reps[m + 1..] {
        let h = hull.len();
        let visible: Vec<bool> = (0..h)
            .map(|i| pred.orient(hull[i], hull[(i + 1) % h], p) < 0.0)
            .collect();
        // Lexicographic insertion order keeps every new point outside the
        // hull, so at least one edge is visible and the visible run is contiguous.
        let start = (0..h)
            .find(|&i| visible[i] && !visible[(i + h - 1) % h])
            .expect("new point sees a contiguous run of hull edges");
        let mut end = start;
        while visible[(end + 1) % h] {
            end = (end + 1) % h;
        }
        let mut i = start;
        loop {
            let (a, b) = (hull[i], hull[(i + 1) % h]);
            mesh.add([b, a, p]);
            if i == end {
                break;
            }
            i = (i + 1) % h;
        }
        // Rebuild hull: hull[start], p, hull[end+1], ... , hull[start-1].
        let mut next = Vec::with_capacity(h + 1);
        next.push(hull[start]);
        next.push(p);
        let mut k = (end + 1) % h;
        while k != start {
            next.push(hull[k]);
            k = (k + 1) % h;
        }
        hull = next;
    }

    lawson_flip(pred, &mut mesh);

    let mut edges = BTreeSet::new();
    for &[a, b, c] in &mesh.tris {
        edges.insert(ordered(a, b));
        edges.insert(ordered(b, c));
        edges.insert(ordered(c, a));
    }
    edges
}

fn lawson_flip(pred: &Predicates<'_>, mesh: &mut Mesh) {
    let mut stack: Vec<(usize, usize)> = mesh
        .half_edges
        .keys()
        .filter(|&&(a, b)| a < b && mesh.half_edges.contains_key(&(b, a)))
        .copied()
        .collect();
    stack.sort_unstable();
    while let Some((a, b)) = stack.pop() {
        let (Some(&t1), Some(&t2)) = (mesh.half_edges.get(&(a, b)), mesh.half_edges.get(&(b, a))) else {
            continue;
        };
        let c = mesh.apex(t1, a, b);
        let d = mesh.apex(t2, a, b);
        if !pred.in_circle(a, b, c, d) {
            continue;
        }
        if pred.orient(a, d, c) <= 0.0 || pred.orient(d, b, c) <= 0.0 {
            continue;
        }
        mesh.unlink(t1);
        mesh.unlink(t2);
        mesh.tris[t1] = [a, d, c];
        mesh.tris[t2] = [d, b, c];
        mesh.link(t1);
        mesh.link(t2);
        stack.extend([(a, d), (d, b), (b, c), (c, a)]);
    }
}
