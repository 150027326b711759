//! Lanelet-to-lanelet topology edges and vehicle-to-lanelet assignment.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{polyline_intersection, rectangle_polygon_overlap, Polygon, Vec2};
use crate::scenario::{Lanelet, VehicleSnapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum L2LAdjacencyType {
    Predecessor = 0,
    Successor = 1,
    AdjacentLeft = 2,
    AdjacentRight = 3,
    Merging = 4,
    Diverging = 5,
    Conflicting = 6,
}

impl L2LAdjacencyType {
    pub const ALL: [L2LAdjacencyType; 7] = [
        L2LAdjacencyType::Predecessor,
        L2LAdjacencyType::Successor,
        L2LAdjacencyType::AdjacentLeft,
        L2LAdjacencyType::AdjacentRight,
        L2LAdjacencyType::Merging,
        L2LAdjacencyType::Diverging,
        L2LAdjacencyType::Conflicting,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn all() -> BTreeSet<L2LAdjacencyType> {
        Self::ALL.into_iter().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2LEdgeRecord {
    pub source: i64,
    pub target: i64,
    pub adjacency: L2LAdjacencyType,
    /// Arclength on the source centerline where the relation applies.
    pub s_source: f64,
    pub s_target: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum V2LAssignmentStrategy {
    #[default]
    Center,
    Shape,
}

/// Declared successor relation, closed under the predecessor references.
fn successor_pairs(network: &BTreeMap<i64, Lanelet>) -> BTreeSet<(i64, i64)> {
    let mut pairs = BTreeSet::new();
    for l in network.values() {
        for &s in &l.successors {
            pairs.insert((l.id, s));
        }
        for &p in &l.predecessors {
            pairs.insert((p, l.id));
        }
    }
    pairs.retain(|(a, b)| a != b && network.contains_key(a) && network.contains_key(b));
    pairs
}

/// Ordered pairs of distinct lanelets sharing a key in `groups`.
fn sharing_pairs(groups: &BTreeMap<i64, BTreeSet<i64>>) -> BTreeSet<(i64, i64)> {
    let mut pairs = BTreeSet::new();
    for members in groups.values() {
        for &a in members {
            for &b in members {
                if a != b {
                    pairs.insert((a, b));
                }
            }
        }
    }
    pairs
}

/// L2L edges of the enabled types, sorted by (source, target, type).
///
/// Arclength conventions: successor edges hand over at (length(source), 0),
/// predecessor edges mirror that, lateral neighbours meet at their midpoints,
/// merging pairs at their ends, diverging pairs at their starts, and
/// conflicting pairs at the first centerline crossing. Conflicting edges
/// are only drawn between lanelets with no other relation.
pub fn build_l2l_edges(network: &BTreeMap<i64, Lanelet>, enabled: &BTreeSet<L2LAdjacencyType>) -> Vec<L2LEdgeRecord> {
    use L2LAdjacencyType::*;
    let len = |id: i64| network[&id].length();
    let mut out = Vec::new();
    let mut related = BTreeSet::new();
    let mut emit = |out: &mut Vec<L2LEdgeRecord>, a: i64, b: i64, t: L2LAdjacencyType, sa: f64, sb: f64| {
        related.insert((a.min(b), a.max(b)));
        if enabled.contains(&t) {
            out.push(L2LEdgeRecord { source: a, target: b, adjacency: t, s_source: sa, s_target: sb });
        }
    };

    let succ = successor_pairs(network);
    for &(a, b) in &succ {
        emit(&mut out, a, b, Successor, len(a), 0.0);
        emit(&mut out, b, a, Predecessor, 0.0, len(a));
    }
    for l in network.values() {
        if let Some(adj) = l.adjacent_left.filter(|a| a.id != l.id && network.contains_key(&a.id)) {
            emit(&mut out, adj.id, l.id, AdjacentLeft, len(adj.id) / 2.0, l.length() / 2.0);
        }
        if let Some(adj) = l.adjacent_right.filter(|a| a.id != l.id && network.contains_key(&a.id)) {
            emit(&mut out, adj.id, l.id, AdjacentRight, len(adj.id) / 2.0, l.length() / 2.0);
        }
    }
    let mut by_successor: BTreeMap<i64, BTreeSet<i64>> = BTreeMap::new();
    let mut by_predecessor: BTreeMap<i64, BTreeSet<i64>> = BTreeMap::new();
    for &(a, b) in &succ {
        by_successor.entry(b).or_default().insert(a);
        by_predecessor.entry(a).or_default().insert(b);
    }
    for (a, b) in sharing_pairs(&by_successor) {
        emit(&mut out, a, b, Merging, len(a), len(b));
    }
    for (a, b) in sharing_pairs(&by_predecessor) {
        emit(&mut out, a, b, Diverging, 0.0, 0.0);
    }

    if enabled.contains(&Conflicting) {
        let ids: Vec<i64> = network.keys().copied().collect();
        let boxes: Vec<(Vec2, Vec2)> = ids.iter().map(|id| network[id].center.bounds()).collect();
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                let ((alo, ahi), (blo, bhi)) = (boxes[i], boxes[j]);
                if alo.x > bhi.x || blo.x > ahi.x || alo.y > bhi.y || blo.y > ahi.y {
                    continue;
                }
                if related.contains(&(ids[i], ids[j])) {
                    continue;
                }
                let hits = polyline_intersection(&network[&ids[i]].center, &network[&ids[j]].center);
                if let Some(h) = hits.first() {
                    out.push(L2LEdgeRecord {
                        source: ids[i],
                        target: ids[j],
                        adjacency: Conflicting,
                        s_source: h.arclength_a,
                        s_target: h.arclength_b,
                    });
                    out.push(L2LEdgeRecord {
                        source: ids[j],
                        target: ids[i],
                        adjacency: Conflicting,
                        s_source: h.arclength_b,
                        s_target: h.arclength_a,
                    });
                }
            }
        }
    }

    out.sort_by_key(|x| (x.source, x.target, x.adjacency));
    out.dedup_by(|x, y| (x.source, x.target, x.adjacency) == (y.source, y.target, y.adjacency));
    out
}

/// Lanelet polygons, computed once per map.
#[derive(Debug, Clone)]
pub struct LaneletPolygons {
    ids: Vec<i64>,
    polygons: Vec<Polygon>,
}

impl LaneletPolygons {
    pub fn new(network: &BTreeMap<i64, Lanelet>) -> Result<Self> {
        let ids = network.keys().copied().collect();
        let polygons = network.values().map(Lanelet::polygon).collect::<Result<_>>()?;
        Ok(Self { ids, polygons })
    }

    pub fn ids(&self) -> &[i64] {
        &self.ids
    }
}

/// (vehicle id, lanelet id) pairs, sorted. `Center` assigns a vehicle to
/// every lanelet containing its center; `Shape` to every lanelet its
/// rectangle touches.
pub fn build_v2l_edges(
    vehicles: &[VehicleSnapshot],
    lanelets: &LaneletPolygons,
    strategy: V2LAssignmentStrategy,
) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for v in vehicles {
        let p = v.state.position;
        for (id, poly) in lanelets.ids.iter().zip(&lanelets.polygons) {
            // a rectangle always contains its own center
            let hit = poly.contains(p)
                || strategy == V2LAssignmentStrategy::Shape
                    && rectangle_polygon_overlap(p, v.state.orientation, v.length, v.width, poly);
            if hit {
                out.push((v.id, *id));
            }
        }
    }
    out.sort_unstable();
    out
}

/// L2V edges are the reversed V2L edges.
pub fn build_l2v_edges<T: Copy>(v2l: &[(T, T)]) -> Vec<(T, T)> {
    v2l.iter().map(|&(v, l)| (l, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polyline;
    use crate::scenario::{Adjacency, VehicleState};

    fn lanelet(id: i64, from: (f64, f64), to: (f64, f64)) -> Lanelet {
        let d = (Vec2::from(to) - Vec2::from(from)) * (1.0 / Vec2::from(to).distance(Vec2::from(from)));
        let n = Vec2::new(-d.y, d.x);
        let (a, b) = (Vec2::from(from), Vec2::from(to));
        Lanelet::new(
            id,
            Polyline::new(vec![a + n, b + n]).unwrap(),
            Polyline::new(vec![a - n, b - n]).unwrap(),
            Some(Polyline::new(vec![a, b]).unwrap()),
        )
        .unwrap()
    }

    fn network(ls: Vec<Lanelet>) -> BTreeMap<i64, Lanelet> {
        ls.into_iter().map(|l| (l.id, l)).collect()
    }

    fn kinds(edges: &[L2LEdgeRecord]) -> Vec<(i64, i64, L2LAdjacencyType)> {
        edges.iter().map(|e| (e.source, e.target, e.adjacency)).collect()
    }

    #[test]
    fn successor_and_predecessor() {
        let mut a = lanelet(1, (0.0, 0.0), (10.0, 0.0));
        a.successors.insert(2);
        let b = lanelet(2, (10.0, 0.0), (20.0, 0.0));
        let edges = build_l2l_edges(&network(vec![a, b]), &L2LAdjacencyType::all());
        assert_eq!(
            kinds(&edges),
            vec![(1, 2, L2LAdjacencyType::Successor), (2, 1, L2LAdjacencyType::Predecessor)]
        );
        assert_eq!((edges[0].s_source, edges[0].s_target), (10.0, 0.0));
        assert_eq!((edges[1].s_source, edges[1].s_target), (0.0, 10.0));
    }

    #[test]
    fn merging_is_symmetric() {
        let mut x = lanelet(1, (0.0, 5.0), (10.0, 0.0));
        let mut y = lanelet(2, (0.0, -5.0), (10.0, 0.0));
        x.successors.insert(3);
        y.successors.insert(3);
        let z = lanelet(3, (10.0, 0.0), (20.0, 0.0));
        let edges = build_l2l_edges(&network(vec![x, y, z]), &[L2LAdjacencyType::Merging].into());
        assert_eq!(kinds(&edges), vec![(1, 2, L2LAdjacencyType::Merging), (2, 1, L2LAdjacencyType::Merging)]);
    }

    #[test]
    fn crossing_lanelets_conflict() {
        let a = lanelet(1, (0.0, -5.0), (0.0, 5.0));
        let b = lanelet(2, (-5.0, 0.0), (5.0, 0.0));
        let edges = build_l2l_edges(&network(vec![a, b]), &L2LAdjacencyType::all());
        assert_eq!(edges.len(), 2);
        for e in &edges {
            assert_eq!(e.adjacency, L2LAdjacencyType::Conflicting);
            assert!((e.s_source - 5.0).abs() < 1e-9 && (e.s_target - 5.0).abs() < 1e-9);
        }
    }

    #[test]
    fn left_neighbour_edge_direction() {
        let mut a = lanelet(1, (0.0, 0.0), (10.0, 0.0));
        let b = lanelet(2, (0.0, 2.0), (10.0, 2.0));
        a.adjacent_left = Some(Adjacency { id: 2, same_direction: true });
        let edges = build_l2l_edges(&network(vec![a, b]), &L2LAdjacencyType::all());
        assert_eq!(kinds(&edges), vec![(2, 1, L2LAdjacencyType::AdjacentLeft)]);
        assert_eq!(edges[0].s_source, 5.0);
    }

    #[test]
    fn related_crossing_pairs_are_not_conflicting() {
        let mut x = lanelet(1, (0.0, 5.0), (10.0, -5.0));
        let mut y = lanelet(2, (0.0, -5.0), (10.0, 5.0));
        x.successors.insert(3);
        y.successors.insert(3);
        let z = lanelet(3, (10.0, 0.0), (20.0, 0.0));
        let edges = build_l2l_edges(&network(vec![x, y, z]), &L2LAdjacencyType::all());
        assert!(edges.iter().all(|e| e.adjacency != L2LAdjacencyType::Conflicting));
    }

    #[test]
    fn empty_network() {
        assert!(build_l2l_edges(&BTreeMap::new(), &L2LAdjacencyType::all()).is_empty());
    }

    fn vehicle(id: i64, x: f64, y: f64) -> VehicleSnapshot {
        VehicleSnapshot { id, length: 4.0, width: 2.0, state: VehicleState::new(0, Vec2::new(x, y), 0.0, Vec2::ZERO) }
    }

    #[test]
    fn center_and_shape_assignment() {
        // two 2 m wide lanes, y in [-1, 1] and [1, 3]
        let net = network(vec![lanelet(1, (0.0, 0.0), (20.0, 0.0)), lanelet(2, (0.0, 2.0), (20.0, 2.0))]);
        let polys = LaneletPolygons::new(&net).unwrap();
        let inside = [vehicle(7, 10.0, 0.0)];
        assert_eq!(build_v2l_edges(&inside, &polys, V2LAssignmentStrategy::Center), vec![(7, 1)]);
        let straddle = [vehicle(8, 10.0, 1.4)];
        assert_eq!(build_v2l_edges(&straddle, &polys, V2LAssignmentStrategy::Center), vec![(8, 2)]);
        assert_eq!(build_v2l_edges(&straddle, &polys, V2LAssignmentStrategy::Shape), vec![(8, 1), (8, 2)]);
        let far = [vehicle(9, 1000.0, 0.0)];
        assert!(build_v2l_edges(&far, &polys, V2LAssignmentStrategy::Shape).is_empty());
    }

    #[test]
    fn l2v_reverses() {
        assert!(build_l2v_edges::<i64>(&[]).is_empty());
        assert_eq!(build_l2v_edges(&[(1, 10), (1, 11), (2, 10)]), vec![(10, 1), (11, 1), (10, 2)]);
    }
}
