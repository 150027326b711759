//! Vehicle-to-vehicle edge drawers and the causal temporal drawer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{delaunay_neighbors, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum V2VDrawerKind {
    #[default]
    Voronoi,
    KNearest,
    FullyConnected,
    Radius,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct V2VDrawerConfig {
    pub kind: V2VDrawerKind,
    pub k: usize,
    pub radius: f64,
    /// Drops every edge longer than this, whatever the kind.
    pub max_distance: Option<f64>,
}

impl Default for V2VDrawerConfig {
    fn default() -> Self {
        Self { kind: V2VDrawerKind::Voronoi, k: 3, radius: 30.0, max_distance: None }
    }
}

impl V2VDrawerConfig {
    pub fn new(kind: V2VDrawerKind) -> Self {
        Self { kind, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == V2VDrawerKind::KNearest && self.k == 0 {
            return Err(Error::Argument("k must be at least 1".into()));
        }
        if self.kind == V2VDrawerKind::Radius && !(self.radius > 0.0) {
            return Err(Error::Argument(format!("radius must be positive, got {}", self.radius)));
        }
        if let Some(d) = self.max_distance {
            if d.is_nan() || d < 0.0 {
                return Err(Error::Argument(format!("max_distance must be non-negative, got {d}")));
            }
        }
        Ok(())
    }
}

/// Directed V2V edges as (source, target) indices into `vehicles`, sorted by
/// (source id, target id).
///
/// `KNearest` points from each of the k nearest vehicles toward the ego
/// vehicle; equal distances prefer the smaller id.
pub fn draw_v2v(config: &V2VDrawerConfig, vehicles: &[(i64, Vec2)]) -> Vec<(usize, usize)> {
    let n = vehicles.len();
    if n < 2 {
        return Vec::new();
    }
    let dist = |i: usize, j: usize| vehicles[i].1.distance(vehicles[j].1);
    let mut edges: Vec<(usize, usize)> = match config.kind {
        V2VDrawerKind::Voronoi => {
            let points: Vec<Vec2> = vehicles.iter().map(|v| v.1).collect();
            delaunay_neighbors(&points).into_iter().flat_map(|(a, b)| [(a, b), (b, a)]).collect()
        }
        V2VDrawerKind::FullyConnected => {
            (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect()
        }
        V2VDrawerKind::Radius => (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .filter(|&(i, j)| dist(i, j) <= config.radius)
            .collect(),
        V2VDrawerKind::KNearest => {
            let mut out = Vec::new();
            for ego in 0..n {
                let mut others: Vec<usize> = (0..n).filter(|&j| j != ego).collect();
                others.sort_by(|&a, &b| dist(ego, a).total_cmp(&dist(ego, b)).then(vehicles[a].0.cmp(&vehicles[b].0)));
                out.extend(others.into_iter().take(config.k).map(|j| (j, ego)));
            }
            out
        }
    };
    if let Some(max) = config.max_distance {
        edges.retain(|&(i, j)| dist(i, j) <= max);
    }
    edges.sort_by_key(|&(i, j)| (vehicles[i].0, vehicles[j].0));
    edges
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VTVDrawerConfig {
    /// Longest edge span in timesteps.
    pub max_horizon: i64,
}

impl Default for VTVDrawerConfig {
    fn default() -> Self {
        Self { max_horizon: 4 }
    }
}

impl VTVDrawerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_horizon < 1 {
            return Err(Error::Argument(format!("VTV horizon must be at least 1, got {}", self.max_horizon)));
        }
        Ok(())
    }
}

/// Forward-in-time edges between realizations of the same vehicle at most
/// `max_horizon` steps apart, as (older, newer) node indices. Nodes are given
/// by parallel id and timestep slices.
pub fn draw_vtv(config: &VTVDrawerConfig, ids: &[i64], timesteps: &[i64]) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by_key(|&i| (ids[i], timesteps[i]));
    let mut edges = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let id = ids[order[start]];
        let end = start + order[start..].iter().take_while(|&&i| ids[i] == id).count();
        for a in start..end {
            for b in a + 1..end {
                let (old, new) = (order[a], order[b]);
                let span = timesteps[new] - timesteps[old];
                if span > config.max_horizon {
                    break;
                }
                if span > 0 {
                    edges.push((old, new));
                }
            }
        }
        start = end;
    }
    edges.sort_unstable();
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(p: &[(f64, f64)]) -> Vec<(i64, Vec2)> {
        p.iter().enumerate().map(|(i, &q)| (i as i64 + 1, Vec2::from(q))).collect()
    }

    #[test]
    fn triangle_is_complete() {
        let v = pts(&[(0.0, 0.0), (4.0, 0.0), (1.0, 3.0)]);
        assert_eq!(draw_v2v(&V2VDrawerConfig::default(), &v).len(), 6);
    }

    #[test]
    fn k_clipped_to_available() {
        let v = pts(&[(0.0, 0.0), (4.0, 0.0)]);
        let cfg = V2VDrawerConfig { k: 3, ..V2VDrawerConfig::new(V2VDrawerKind::KNearest) };
        assert_eq!(draw_v2v(&cfg, &v), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn collinear_ties_prefer_smaller_id() {
        let v = pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0)]);
        let cfg = V2VDrawerConfig { k: 1, ..V2VDrawerConfig::new(V2VDrawerKind::KNearest) };
        let mut got = draw_v2v(&cfg, &v);
        got.sort_by_key(|&(s, t)| (t, s));
        // ego -> chosen neighbour
        assert_eq!(got, vec![(1, 0), (0, 1), (1, 2), (2, 3), (3, 4)]);
    }

    #[test]
    fn empty_and_single() {
        let cfg = V2VDrawerConfig::default();
        assert!(draw_v2v(&cfg, &[]).is_empty());
        assert!(draw_v2v(&cfg, &pts(&[(1.0, 1.0)])).is_empty());
    }

    #[test]
    fn radius_and_cutoff() {
        let v = pts(&[(0.0, 0.0), (5.0, 0.0), (50.0, 0.0)]);
        let cfg = V2VDrawerConfig { radius: 10.0, ..V2VDrawerConfig::new(V2VDrawerKind::Radius) };
        assert_eq!(draw_v2v(&cfg, &v), vec![(0, 1), (1, 0)]);
        let cut = V2VDrawerConfig { max_distance: Some(10.0), ..V2VDrawerConfig::new(V2VDrawerKind::FullyConnected) };
        assert_eq!(draw_v2v(&cut, &v), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn vtv_counts() {
        let ids = [7, 7, 7];
        let ts = [0, 1, 2];
        assert_eq!(draw_vtv(&VTVDrawerConfig { max_horizon: 2 }, &ids, &ts), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(draw_vtv(&VTVDrawerConfig { max_horizon: 1 }, &ids, &ts).len(), 2);
        assert!(draw_vtv(&VTVDrawerConfig::default(), &[3], &[5]).is_empty());
    }

    #[test]
    fn invalid_configs() {
        assert!(V2VDrawerConfig { k: 0, ..V2VDrawerConfig::new(V2VDrawerKind::KNearest) }.validate().is_err());
        assert!(V2VDrawerConfig { radius: 0.0, ..V2VDrawerConfig::new(V2VDrawerKind::Radius) }.validate().is_err());
        assert!(VTVDrawerConfig { max_horizon: 0 }.validate().is_err());
    }
}
