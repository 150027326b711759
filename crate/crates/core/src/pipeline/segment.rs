use std::collections::BTreeMap;

use super::ScenarioPreprocessor;
use crate::error::{Error, Result};
use crate::geometry::{Polyline, Vec2};
use crate::scenario::{Adjacency, Lanelet, Scenario};

/// Splits every lanelet longer than `size` metres into equal-arclength
/// pieces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentLanelets {
    pub size: f64,
}

impl SegmentLanelets {
    pub fn new(size: f64) -> Self {
        Self { size }
    }
}

impl ScenarioPreprocessor for SegmentLanelets {
    fn name(&self) -> String {
        format!("SegmentLanelets(size={})", self.size)
    }

    fn apply(&self, scenario: Scenario) -> Result<Scenario> {
        segment_lanelets(scenario, self.size)
    }
}

/// Inserts midpoints into the longest segments until `target` vertices exist.
/// Geometry and arclength are unchanged.
fn densify(mut points: Vec<Vec2>, target: usize) -> Vec<Vec2> {
    while points.len() < target {
        let i = (0..points.len() - 1)
            .max_by(|&a, &b| {
                let da = points[a].distance(points[a + 1]);
                let db = points[b].distance(points[b + 1]);
                // first longest wins
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .expect("at least one segment");
        let mid = points[i].midpoint(points[i + 1]);
        points.insert(i + 1, mid);
    }
    points
}

/// Bound arclengths matching the centerline split points: projections when
/// they are strictly increasing, otherwise proportional positions.
fn bound_splits(bound: &Polyline, center: &Polyline, splits: &[f64]) -> Vec<f64> {
    let k = splits.len() - 1;
    let mut projected: Vec<f64> = splits.iter().map(|&s| bound.project(center.point_at(s).0).arclength).collect();
    projected[0] = 0.0;
    projected[k] = bound.length();
    let monotone = projected.windows(2).all(|w| w[1] - w[0] > 1e-6);
    if monotone {
        projected
    } else {
        (0..=k).map(|i| bound.length() * i as f64 / k as f64).collect()
    }
}

struct Pieces {
    ids: Vec<i64>,
}

impl Pieces {
    fn first(&self) -> i64 {
        self.ids[0]
    }

    fn last(&self) -> i64 {
        *self.ids.last().unwrap()
    }

    /// Piece of this lanelet overlapping the normalized interval `[a, b]`
    /// most; ties go to the lower id.
    fn best_overlap(&self, a: f64, b: f64, same_direction: bool) -> i64 {
        let k = self.ids.len() as f64;
        let mut best = (f64::NEG_INFINITY, i64::MAX);
        for (j, &id) in self.ids.iter().enumerate() {
            let (mut lo, mut hi) = (j as f64 / k, (j + 1) as f64 / k);
            if !same_direction {
                (lo, hi) = (1.0 - hi, 1.0 - lo);
            }
            let overlap = b.min(hi) - a.max(lo);
            if overlap > best.0 + 1e-12 || (overlap > best.0 - 1e-12 && id < best.1) {
                best = (overlap, id);
            }
        }
        best.1
    }
}

/// Splits each lanelet longer than `size` into `ceil(length / size)` pieces
/// of equal centerline arclength. The first piece keeps the original id;
/// the others get fresh ids above the current maximum, in id order.
/// Longitudinal references are rewired through the chain of pieces, and each
/// lateral neighbour reference points at the neighbour piece covering most
/// of the same normalized arclength interval.
pub fn segment_lanelets(scenario: Scenario, size: f64) -> Result<Scenario> {
    if !(size > 0.0) || !size.is_finite() {
        return Err(Error::Argument(format!("segment size must be positive, got {size}")));
    }
    let mut next_id = scenario.lanelets.keys().max().map_or(0, |m| m + 1);
    let mut pieces: BTreeMap<i64, Pieces> = BTreeMap::new();
    let mut geometry: BTreeMap<i64, Lanelet> = BTreeMap::new();

    for l in scenario.lanelets.values() {
        let length = l.length();
        let k = if length > size { (length / size).ceil() as usize } else { 1 };
        if k == 1 {
            pieces.insert(l.id, Pieces { ids: vec![l.id] });
            geometry.insert(l.id, l.clone());
            continue;
        }
        let splits: Vec<f64> =
            (0..=k).map(|i| if i == k { length } else { length * i as f64 / k as f64 }).collect();
        let left_splits = bound_splits(&l.left, &l.center, &splits);
        let right_splits = bound_splits(&l.right, &l.center, &splits);
        let mut ids = Vec::with_capacity(k);
        for i in 0..k {
            let id = if i == 0 {
                l.id
            } else {
                next_id += 1;
                next_id - 1
            };
            let center = l.center.slice_points(splits[i], splits[i + 1]);
            let left = l.left.slice_points(left_splits[i], left_splits[i + 1]);
            let right = l.right.slice_points(right_splits[i], right_splits[i + 1]);
            let n = center.len().max(left.len()).max(right.len());
            let piece = Lanelet::new(
                id,
                Polyline::new(densify(left, n))?,
                Polyline::new(densify(right, n))?,
                Some(Polyline::new(densify(center, n))?),
            )
            .map_err(|e| Error::Geometry(format!("segmenting lanelet {}: {e}", l.id)))?;
            geometry.insert(id, piece);
            ids.push(id);
        }
        pieces.insert(l.id, Pieces { ids });
    }

    for l in scenario.lanelets.values() {
        let own = &pieces[&l.id];
        let k = own.ids.len();
        for (i, &id) in own.ids.iter().enumerate() {
            let (a, b) = (i as f64 / k as f64, (i + 1) as f64 / k as f64);
            let lateral = |adj: Option<Adjacency>| {
                adj.map(|adj| Adjacency {
                    id: pieces.get(&adj.id).map_or(adj.id, |p| p.best_overlap(a, b, adj.same_direction)),
                    same_direction: adj.same_direction,
                })
            };
            let piece = geometry.get_mut(&id).unwrap();
            piece.predecessors = if i == 0 {
                l.predecessors.iter().map(|p| pieces.get(p).map_or(*p, Pieces::last)).collect()
            } else {
                [own.ids[i - 1]].into()
            };
            piece.successors = if i + 1 == k {
                l.successors.iter().map(|s| pieces.get(s).map_or(*s, Pieces::first)).collect()
            } else {
                [own.ids[i + 1]].into()
            };
            piece.adjacent_left = lateral(l.adjacent_left);
            piece.adjacent_right = lateral(l.adjacent_right);
        }
    }

    let out = Scenario { lanelets: geometry, ..scenario };
    out.validate()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use proptest::prelude::*;

    fn straight(id: i64, x0: f64, length: f64, y: f64) -> Lanelet {
        let line = |dy: f64| Polyline::new(vec![Vec2::new(x0, y + dy), Vec2::new(x0 + length, y + dy)]).unwrap();
        Lanelet::new(id, line(1.5), line(-1.5), None).unwrap()
    }

    fn scenario(ls: Vec<Lanelet>) -> Scenario {
        Scenario {
            id: "seg".into(),
            dt: 0.1,
            lanelets: ls.into_iter().map(|l| (l.id, l)).collect(),
            obstacles: BTreeMap::new(),
        }
    }

    #[test]
    fn fifty_metres_in_three() {
        let out = segment_lanelets(scenario(vec![straight(1, 0.0, 50.0, 0.0)]), 20.0).unwrap();
        assert_eq!(out.lanelets.len(), 3);
        let total: f64 = out.lanelets.values().map(Lanelet::length).sum();
        assert!((total - 50.0).abs() < 1e-6);
        assert!(out.lanelets.values().all(|l| l.length() <= 20.0 + 1e-6));
        assert_eq!(out.lanelets[&1].successors, [2].into());
        assert_eq!(out.lanelets[&2].successors, [3].into());
        assert_eq!(out.lanelets[&3].predecessors, [2].into());
    }

    #[test]
    fn short_lanelet_unchanged() {
        let s = scenario(vec![straight(1, 0.0, 15.0, 0.0)]);
        assert_eq!(segment_lanelets(s.clone(), 20.0).unwrap(), s);
    }

    #[test]
    fn chain_rewired() {
        let mut a = straight(1, 0.0, 30.0, 0.0);
        let mut b = straight(2, 30.0, 10.0, 0.0);
        a.successors.insert(2);
        b.predecessors.insert(1);
        let out = segment_lanelets(scenario(vec![a, b]), 20.0).unwrap();
        // pieces of 1: ids 1 and 3
        assert_eq!(out.lanelets[&3].successors, [2].into());
        assert_eq!(out.lanelets[&2].predecessors, [3].into());
        assert_eq!(out.lanelets[&1].successors, [3].into());
    }

    #[test]
    fn lateral_neighbours_follow_pieces() {
        let mut a = straight(1, 0.0, 40.0, 0.0);
        let mut b = straight(2, 0.0, 40.0, 3.0);
        a.adjacent_left = Some(Adjacency { id: 2, same_direction: true });
        b.adjacent_right = Some(Adjacency { id: 1, same_direction: true });
        let out = segment_lanelets(scenario(vec![a, b]), 20.0).unwrap();
        // 1 -> {1, 3}, 2 -> {2, 4}
        assert_eq!(out.lanelets[&1].adjacent_left.unwrap().id, 2);
        assert_eq!(out.lanelets[&3].adjacent_left.unwrap().id, 4);
        assert_eq!(out.lanelets[&4].adjacent_right.unwrap().id, 3);
    }

    #[test]
    fn opposite_direction_neighbour_maps_reversed() {
        let mut a = straight(1, 0.0, 40.0, 0.0);
        let line = |y: f64| Polyline::new(vec![Vec2::new(40.0, y), Vec2::new(0.0, y)]).unwrap();
        let mut b = Lanelet::new(2, line(1.5), line(4.5), None).unwrap();
        a.adjacent_left = Some(Adjacency { id: 2, same_direction: false });
        b.adjacent_left = Some(Adjacency { id: 1, same_direction: false });
        let out = segment_lanelets(scenario(vec![a, b]), 20.0).unwrap();
        // the first piece of 1 (x in [0, 20]) lies beside the second piece of 2
        assert_eq!(out.lanelets[&1].adjacent_left.unwrap().id, 4);
        assert_eq!(out.lanelets[&3].adjacent_left.unwrap().id, 2);
    }

    #[test]
    fn rejects_non_positive_size() {
        let s = scenario(vec![straight(1, 0.0, 10.0, 0.0)]);
        assert!(matches!(segment_lanelets(s.clone(), 0.0), Err(Error::Argument(_))));
        assert!(matches!(segment_lanelets(s, -3.0), Err(Error::Argument(_))));
    }

    fn wavy(n: usize, seed: &[f64]) -> Lanelet {
        let mut center = Vec::new();
        let mut p = Vec2::ZERO;
        let mut heading = 0.0;
        for i in 0..n {
            center.push(p);
            heading += seed[i % seed.len()] * 0.3;
            p += Vec2::from_angle(heading) * (3.0 + 5.0 * seed[(i + 1) % seed.len()].abs());
        }
        let offset = |sign: f64| {
            let pts: Vec<Vec2> = (0..n)
                .map(|i| {
                    let d = if i + 1 < n { center[i + 1] - center[i] } else { center[i] - center[i - 1] };
                    let nrm = Vec2::new(-d.y, d.x) * (1.0 / d.norm());
                    center[i] + nrm * (sign * 1.75)
                })
                .collect();
            Polyline::new(pts).unwrap()
        };
        Lanelet::new(1, offset(1.0), offset(-1.0), None).unwrap()
    }

    proptest! {
        #[test]
        fn segmentation_preserves_length(
            seed in proptest::collection::vec(-1.0f64..1.0, 3..8),
            n in 2usize..12,
            size in 2.0f64..30.0,
        ) {
            let l = wavy(n, &seed);
            let length = l.length();
            let out = segment_lanelets(scenario(vec![l]), size).unwrap();
            let total: f64 = out.lanelets.values().map(Lanelet::length).sum();
            prop_assert!((total - length).abs() < 1e-6);
            let expected = if length > size { (length / size).ceil() as usize } else { 1 };
            prop_assert_eq!(out.lanelets.len(), expected);
            for piece in out.lanelets.values() {
                prop_assert!(piece.length() <= size + 1e-6 || expected == 1);
            }
        }
    }
}
