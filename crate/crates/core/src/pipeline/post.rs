use std::sync::Arc;

use crate::error::{Error, Result};
use crate::features::channel;
use crate::graph::{NodeType, Relation, TrafficGraph};

/// Deferred transformation of a finished graph.
pub trait Postprocessor: Send + Sync {
    fn name(&self) -> String;
    /// Name plus parameters; feeds dataset fingerprints.
    fn describe(&self) -> String {
        self.name()
    }
    fn apply(&self, graph: TrafficGraph) -> Result<TrafficGraph>;
}

/// Applies postprocessors in order and rescans the graph after each one.
pub fn apply_postprocessors(list: &[Arc<dyn Postprocessor>], graph: TrafficGraph) -> Result<TrafficGraph> {
    let mut g = graph;
    for p in list {
        g = p.apply(g).map_err(|e| Error::component("postprocessor", p.name(), e))?;
        if let Some(v) = g.scan().into_iter().next() {
            return Err(Error::component("postprocessor", p.name(), Error::Validation(v.to_string())));
        }
    }
    Ok(g)
}

/// Sets the graph-level channel `traffic_jam` to 1 when at least
/// `min_vehicles` vehicles are present and their mean speed is below
/// `max_mean_speed`, else to 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficJam {
    pub max_mean_speed: f64,
    pub min_vehicles: usize,
}

impl Default for TrafficJam {
    fn default() -> Self {
        Self { max_mean_speed: 2.0, min_vehicles: 3 }
    }
}

impl Postprocessor for TrafficJam {
    fn name(&self) -> String {
        "traffic_jam".into()
    }

    fn describe(&self) -> String {
        format!("traffic_jam(max_mean_speed={}, min_vehicles={})", self.max_mean_speed, self.min_vehicles)
    }

    fn apply(&self, mut graph: TrafficGraph) -> Result<TrafficGraph> {
        let v = &graph.vehicles;
        if v.schema.locate(channel::VELOCITY).is_none() {
            return Err(Error::Schema("vehicle store has no velocity channel".into()));
        }
        let speeds: Vec<f64> = (0..v.len())
            .map(|i| {
                let vel = v.channel(i, channel::VELOCITY).unwrap();
                f64::from(vel[0]).hypot(f64::from(vel[1]))
            })
            .collect();
        let jam = speeds.len() >= self.min_vehicles
            && !speeds.is_empty()
            && speeds.iter().sum::<f64>() / (speeds.len() as f64) < self.max_mean_speed;
        graph.set_global("traffic_jam", vec![if jam { 1.0 } else { 0.0 }]);
        Ok(graph)
    }
}

/// Drops vehicles without any V2L edge, re-indexing every edge store.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RemoveOffroadVehicles;

impl Postprocessor for RemoveOffroadVehicles {
    fn name(&self) -> String {
        "remove_offroad_vehicles".into()
    }

    fn apply(&self, mut graph: TrafficGraph) -> Result<TrafficGraph> {
        let mut on_road = vec![false; graph.vehicles.len()];
        if let Some(e) = graph.edge_store(Relation::V2L) {
            for s in &e.sources {
                if let Some(flag) = on_road.get_mut(*s) {
                    *flag = true;
                }
            }
        }
        graph.retain_nodes(NodeType::Vehicle, &on_road)?;
        Ok(graph)
    }
}

pub const BUILTIN_POSTPROCESSORS: &[&str] = &["traffic_jam", "remove_offroad_vehicles"];
