//! Rigid-motion comparison of extracted features.
//!
//! Stored features are f32, whose spacing near 100 m (~7.6e-6) is coarser
//! than the tolerance of interest. Edge sets are therefore compared on the
//! stored graphs and feature values recomputed in f64 over those edges.

use std::sync::Arc;

use trafficgraph::builders::{build_l2l_edges, L2LAdjacencyType};
use trafficgraph::extractor::{ExtractionConfig, Simulation, TrafficExtractor};
use trafficgraph::features::{l2l_row, v2l_row, v2v_row};
use trafficgraph::geometry::{wrap_angle, Vec2};
use trafficgraph::graph::{Relation, TrafficGraph};
use trafficgraph::scenario::Scenario;

fn id_pairs(g: &TrafficGraph, r: Relation) -> Vec<(i64, i64)> {
    let (src, dst) = (g.nodes(r.source()), g.nodes(r.target()));
    g.edge_store(r).unwrap().endpoints().map(|(s, t)| (src.ids[s], dst.ids[t])).collect()
}

fn angle_aware(a: &[f64], b: &[f64], angles: &[usize]) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (x, y))| if angles.contains(&i) { wrap_angle(x - y).abs() } else { (x - y).abs() })
        .fold(0.0, f64::max)
}

/// Largest deviation of relative features between `scenario` and its image
/// under `x ↦ R(angle)·x + offset`. Differing edge sets are reported as errors.
pub fn rigid_deviation(scenario: &Scenario, angle: f64, offset: Vec2) -> Result<f64, String> {
    let moved = scenario.rigid_transform(angle, offset).map_err(|e| e.to_string())?;
    let config = ExtractionConfig::default();
    let sims = [
        Arc::new(Simulation::new(scenario.clone()).unwrap()),
        Arc::new(Simulation::new(moved).unwrap()),
    ];
    let mut ex: Vec<TrafficExtractor> =
        sims.iter().map(|s| TrafficExtractor::new(config.clone(), Arc::clone(s)).unwrap()).collect();
    let mut worst: f64 = 0.0;

    let l2l: Vec<_> =
        sims.iter().map(|s| build_l2l_edges(&s.scenario().lanelets, &L2LAdjacencyType::all())).collect();
    if l2l[0].len() != l2l[1].len() {
        return Err(format!("L2L edge count {} vs {}", l2l[0].len(), l2l[1].len()));
    }
    for (a, b) in l2l[0].iter().zip(&l2l[1]) {
        if (a.source, a.target, a.adjacency) != (b.source, b.target, b.adjacency) {
            return Err(format!("L2L edge {a:?} vs {b:?}"));
        }
        let net = |k: usize, id: i64| &sims[k].scenario().lanelets[&id];
        let ra = l2l_row(a, net(0, a.source), net(0, a.target));
        let rb = l2l_row(b, net(1, b.source), net(1, b.target));
        worst = worst.max(angle_aware(&ra, &rb, &[3]));
    }

    let (first, last) = sims[0].lifetime();
    for t in first..=last {
        let g0 = ex[0].extract(t).map_err(|e| e.to_string())?;
        let g1 = ex[1].extract(t).map_err(|e| e.to_string())?;
        for r in [Relation::L2L, Relation::V2V, Relation::V2L, Relation::L2V] {
            if id_pairs(&g0, r) != id_pairs(&g1, r) {
                return Err(format!("{r:?} edges differ at t={t}"));
            }
        }
        for (s, d) in id_pairs(&g0, Relation::V2V) {
            let st = |k: usize, id: i64| *sims[k].state(id, t).unwrap();
            let ra = v2v_row(&st(0, s), &st(0, d));
            let rb = v2v_row(&st(1, s), &st(1, d));
            worst = worst.max(angle_aware(&ra, &rb, &[3]));
        }
        for (v, l) in id_pairs(&g0, Relation::V2L) {
            let row = |k: usize| {
                let s = sims[k].state(v, t).unwrap();
                v2l_row(s.position, s.orientation, &sims[k].scenario().lanelets[&l])
            };
            worst = worst.max(angle_aware(&row(0), &row(1), &[3]));
        }
        // Absolute vehicle channels transform covariantly.
        for id in &g0.vehicles.ids {
            let (a, b) = (sims[0].state(*id, t).unwrap(), sims[1].state(*id, t).unwrap());
            worst = worst.max((a.position.rotate(angle) + offset).distance(b.position));
            worst = worst.max(wrap_angle(a.orientation + angle - b.orientation).abs());
            worst = worst.max(a.velocity.rotate(angle).distance(b.velocity));
        }
    }
    Ok(worst)
}
