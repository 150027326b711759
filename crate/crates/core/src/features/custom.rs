use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{Channel, GraphSchema, NodeType, Relation, StoreKey, TrafficGraph};
use crate::scenario::{Lanelet, Scenario, VehicleSnapshot};

/// Everything a per-timestep extractor may look at. Node slices are in
/// store order; edge lists hold store indices.
pub struct StepContext<'a> {
    pub scenario: &'a Scenario,
    pub timestep: i64,
    pub vehicles: &'a [VehicleSnapshot],
    pub lanelets: &'a [&'a Lanelet],
    pub edges: &'a BTreeMap<Relation, Vec<(usize, usize)>>,
}

impl StepContext<'_> {
    /// Row count of a store at this step.
    pub fn rows(&self, store: StoreKey) -> usize {
        match store {
            StoreKey::Node(NodeType::Vehicle) => self.vehicles.len(),
            StoreKey::Node(NodeType::Lanelet) => self.lanelets.len(),
            StoreKey::Edge(r) => self.edges.get(&r).map_or(0, Vec::len),
        }
    }
}

/// User-defined channels appended to one store of every single-step graph.
/// Instances may keep state across the timesteps of one scenario; `reset`
/// is called before each scenario.
pub trait FeatureExtractor: Send {
    fn name(&self) -> &str;
    fn store(&self) -> StoreKey;
    fn channels(&self) -> Vec<Channel>;
    fn reset(&mut self) {}
    /// One row per node or edge of the target store.
    fn extract(&mut self, ctx: &StepContext<'_>) -> Result<Vec<Vec<f32>>>;
}

/// Like [`FeatureExtractor`], but runs on the merged temporal graph.
pub trait TemporalFeatureExtractor: Send {
    fn name(&self) -> &str;
    fn store(&self) -> StoreKey;
    fn channels(&self) -> Vec<Channel>;
    fn reset(&mut self) {}
    fn extract(&mut self, graph: &TrafficGraph, scenario: &Scenario) -> Result<Vec<Vec<f32>>>;
}

/// Appends an extractor's channels to its store. Names must not collide.
pub fn register_channels(schema: &mut GraphSchema, store: StoreKey, channels: Vec<Channel>) -> Result<()> {
    let target = schema.get_mut(store);
    for c in channels {
        target.push(c).map_err(|e| Error::Schema(format!("store {store}: {e}")))?;
    }
    Ok(())
}

/// Timesteps elapsed since the extractor first ran in this scenario.
#[derive(Debug, Default)]
pub struct TimeSinceStart {
    start: Option<i64>,
}

impl FeatureExtractor for TimeSinceStart {
    fn name(&self) -> &str {
        "time_since_start"
    }

    fn store(&self) -> StoreKey {
        StoreKey::Node(NodeType::Vehicle)
    }

    fn channels(&self) -> Vec<Channel> {
        vec![Channel::new("time_since_start", 1, "steps")]
    }

    fn reset(&mut self) {
        self.start = None;
    }

    fn extract(&mut self, ctx: &StepContext<'_>) -> Result<Vec<Vec<f32>>> {
        let start = *self.start.get_or_insert(ctx.timestep);
        Ok(vec![vec![(ctx.timestep - start) as f32]; ctx.vehicles.len()])
    }
}

#[derive(Debug, Default)]
pub struct Speed;

impl FeatureExtractor for Speed {
    fn name(&self) -> &str {
        "speed"
    }

    fn store(&self) -> StoreKey {
        StoreKey::Node(NodeType::Vehicle)
    }

    fn channels(&self) -> Vec<Channel> {
        vec![Channel::new("speed", 1, "m/s")]
    }

    fn extract(&mut self, ctx: &StepContext<'_>) -> Result<Vec<Vec<f32>>> {
        Ok(ctx.vehicles.iter().map(|v| vec![v.state.velocity.norm() as f32]).collect())
    }
}

/// Number of earlier realizations of each temporal vehicle node in the window.
#[derive(Debug, Default)]
pub struct HistoryDepth;

impl TemporalFeatureExtractor for HistoryDepth {
    fn name(&self) -> &str {
        "history_depth"
    }

    fn store(&self) -> StoreKey {
        StoreKey::Node(NodeType::Vehicle)
    }

    fn channels(&self) -> Vec<Channel> {
        vec![Channel::new("history_depth", 1, "nodes")]
    }

    fn extract(&mut self, graph: &TrafficGraph, _scenario: &Scenario) -> Result<Vec<Vec<f32>>> {
        // nodes are ordered by (id, timestep), so the depth is the run index
        let ids = &graph.vehicles.ids;
        let mut depth = 0.0f32;
        Ok((0..ids.len())
            .map(|i| {
                depth = if i > 0 && ids[i - 1] == ids[i] { depth + 1.0 } else { 0.0 };
                vec![depth]
            })
            .collect())
    }
}

pub const BUILTIN_EXTRACTORS: &[&str] = &["speed", "time_since_start"];
pub const BUILTIN_TEMPORAL_EXTRACTORS: &[&str] = &["history_depth"];

pub fn builtin_extractor(name: &str) -> Option<Box<dyn FeatureExtractor>> {
    match name {
        "speed" => Some(Box::new(Speed)),
        "time_since_start" => Some(Box::<TimeSinceStart>::default()),
        _ => None,
    }
}

pub fn builtin_temporal_extractor(name: &str) -> Option<Box<dyn TemporalFeatureExtractor>> {
    match name {
        "history_depth" => Some(Box::new(HistoryDepth)),
        _ => None,
    }
}
