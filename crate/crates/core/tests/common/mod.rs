#![allow(dead_code)]
pub mod invariance;
pub mod oracle;

use std::path::{Path, PathBuf};
use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use trafficgraph::extractor::{ExtractionConfig, Simulation, TemporalExtractor, TrafficExtractor};
use trafficgraph::geometry::{Polyline, Vec2};
use trafficgraph::graph::TrafficGraph;
use trafficgraph::scenario::{parse_scenario_bytes, DynamicObstacle, Lanelet, Scenario, VehicleState};

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/scenarios")
}

pub fn fixture_paths() -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixture_dir())
        .expect("fixture dir")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "xml"))
        .collect();
    paths.sort();
    paths
}

pub fn load(name: &str) -> Scenario {
    let bytes = std::fs::read(fixture_dir().join(name)).expect("fixture readable");
    parse_scenario_bytes(&bytes).expect("fixture parses")
}

pub fn fixtures() -> Vec<Scenario> {
    fixture_paths()
        .iter()
        .map(|p| parse_scenario_bytes(&std::fs::read(p).unwrap()).unwrap())
        .collect()
}

pub fn extract_all(scenario: &Scenario, config: &ExtractionConfig) -> Vec<TrafficGraph> {
    let sim = Arc::new(Simulation::new(scenario.clone()).unwrap());
    let (first, last) = sim.lifetime();
    let mut ex = TrafficExtractor::new(config.clone(), sim).unwrap();
    (first..=last).map(|t| ex.extract(t).unwrap()).collect()
}

pub fn extract_temporal(scenario: &Scenario, config: &ExtractionConfig) -> Vec<TrafficGraph> {
    let sim = Arc::new(Simulation::new(scenario.clone()).unwrap());
    let (first, last) = sim.lifetime();
    let mut ex = TemporalExtractor::new(config.clone(), sim).unwrap();
    (first..=last).map(|t| ex.extract(t).unwrap()).collect()
}

pub fn straight(x0: f64, x1: f64, y: f64, n: usize) -> Polyline {
    Polyline::new((0..n).map(|i| Vec2::new(x0 + (x1 - x0) * i as f64 / (n - 1) as f64, y)).collect()).unwrap()
}

/// Straight eastbound lanelet of width 4 centered on `y`.
pub fn lane(id: i64, x0: f64, x1: f64, y: f64) -> Lanelet {
    Lanelet::new(id, straight(x0, x1, y + 2.0, 2), straight(x0, x1, y - 2.0, 2), None).unwrap()
}

pub fn obstacle(id: i64, states: Vec<VehicleState>) -> DynamicObstacle {
    DynamicObstacle { id, length: 4.5, width: 1.8, trajectory: states }
}

/// Vehicle driving east at `speed` from `x0`, present on `t0..=t1`.
pub fn cruising(id: i64, x0: f64, y: f64, speed: f64, dt: f64, t0: i64, t1: i64) -> DynamicObstacle {
    let states = (t0..=t1)
        .map(|t| VehicleState::new(t, Vec2::new(x0 + speed * dt * (t - t0) as f64, y), 0.0, Vec2::new(speed, 0.0)))
        .collect();
    obstacle(id, states)
}

/// Random walk of 2 to 5 vertices near the origin.
pub fn random_polyline(rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    let n = rng.gen_range(2..=5);
    let mut p = (rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
    let mut heading: f64 = rng.gen_range(-3.1..3.1);
    let mut pts = vec![p];
    for _ in 1..n {
        heading += rng.gen_range(-1.5..1.5);
        let step = rng.gen_range(0.3..3.0);
        p = (p.0 + step * heading.cos(), p.1 + step * heading.sin());
        pts.push(p);
    }
    pts
}

/// `n` distinct integer points in `[-range, range]²`, not all collinear.
pub fn distinct_points(rng: &mut ChaCha8Rng, n: usize, range: i64) -> Vec<(i64, i64)> {
    loop {
        let pts: Vec<(i64, i64)> = (0..n).map(|_| (rng.gen_range(-range..=range), rng.gen_range(-range..=range))).collect();
        let unique: BTreeSet<_> = pts.iter().collect();
        if unique.len() == n && (2..n).any(|k| oracle::orient(pts[0], pts[1], pts[k]) != 0) {
            return pts;
        }
    }
}
