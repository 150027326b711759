use std::collections::VecDeque;
use std::sync::Arc;

use super::single::checked_rows;
use super::{ExtractionConfig, Simulation, TrafficExtractor};
use crate::drawers::draw_vtv;
use crate::error::{Error, Result};
use crate::features::{to_f32, vtv_row, vtv_schema, TemporalFeatureExtractor};
use crate::graph::{merge_window, EdgeStore, GraphSchema, Relation, StoreKey, TrafficGraph};
use crate::pipeline::apply_postprocessors;

/// Extracts temporal graphs over a sliding window of the `cache_size` most
/// recent single-step graphs. Calls must come with increasing timesteps.
pub struct TemporalExtractor {
    inner: TrafficExtractor,
    cache: VecDeque<TrafficGraph>,
    last: Option<i64>,
    extractors: Vec<Box<dyn TemporalFeatureExtractor>>,
    schema: GraphSchema,
}

impl TemporalExtractor {
    pub fn new(config: ExtractionConfig, simulation: Arc<Simulation>) -> Result<Self> {
        config.validate(true)?;
        let schema = config.temporal_schema()?;
        let mut extractors: Vec<Box<dyn TemporalFeatureExtractor>> =
            config.temporal_extractors.iter().map(|f| f.make()).collect();
        for e in &mut extractors {
            e.reset();
        }
        let inner = TrafficExtractor::new(config, simulation)?;
        Ok(Self { inner, cache: VecDeque::new(), last: None, extractors, schema })
    }

    pub fn schema(&self) -> &GraphSchema {
        &self.schema
    }

    /// True once the window holds `cache_size` graphs.
    pub fn is_warm(&self) -> bool {
        self.cache.len() == self.inner.config().cache_size
    }

    pub fn extract(&mut self, timestep: i64) -> Result<TrafficGraph> {
        if let Some(last) = self.last {
            if timestep <= last {
                return Err(Error::Usage(format!(
                    "temporal extraction must advance in time: t={timestep} after t={last}"
                )));
            }
        }
        let step = self.inner.extract(timestep)?;
        self.last = Some(timestep);
        self.cache.push_back(step);
        while self.cache.len() > self.inner.config().cache_size {
            self.cache.pop_front();
        }
        let window: Vec<TrafficGraph> = self.cache.iter().cloned().collect();
        let mut g = merge_window(&window)?;

        let config = self.inner.config();
        let sim = Arc::clone(self.inner.simulation());
        let timesteps = g.vehicles.timesteps().expect("merged graphs carry timesteps").to_vec();
        let pairs = draw_vtv(&config.vtv, &g.vehicles.ids, &timesteps);
        let mut vtv = EdgeStore::new(Relation::VTV, vtv_schema());
        let mut rows = Vec::with_capacity(pairs.len());
        for &(old, new) in &pairs {
            let id = g.vehicles.ids[old];
            let (t0, t1) = (timesteps[old], timesteps[new]);
            let a = sim.state(id, t0).expect("node states come from the replay");
            let b = sim.state(id, t1).expect("node states come from the replay");
            rows.push(to_f32(&vtv_row(a, b, (t1 - t0) as f64 * g.dt)));
            vtv.sources.push(old);
            vtv.targets.push(new);
        }
        vtv.x = crate::graph::FeatureMatrix::from_values(vtv.schema.width(), rows.into_iter().flatten().collect())?;
        g.edges.insert(Relation::VTV, vtv);

        for e in &mut self.extractors {
            let store = e.store();
            let rows_expected = match store {
                StoreKey::Node(n) => g.nodes(n).len(),
                StoreKey::Edge(r) => g.edges.get(&r).map_or(0, EdgeStore::len),
            };
            let declared: usize = e.channels().iter().map(|c| c.width).sum();
            let rows = e
                .extract(&g, sim.scenario())
                .map_err(|err| Error::component("temporal feature extractor", e.name(), err))?;
            let extra = checked_rows(e.name(), declared, rows_expected, rows)?;
            let channels = e.channels();
            match store {
                StoreKey::Node(n) => {
                    let nodes = g.nodes_mut(n);
                    nodes.x = nodes.x.hstack(&extra, rows_expected)?;
                    for c in channels {
                        nodes.schema.push(c)?;
                    }
                }
                StoreKey::Edge(r) => {
                    let edges = g
                        .edges
                        .get_mut(&r)
                        .ok_or_else(|| Error::Schema(format!("temporal graph has no {} store", r.key())))?;
                    edges.x = edges.x.hstack(&extra, rows_expected)?;
                    for c in channels {
                        edges.schema.push(c)?;
                    }
                }
            }
        }
        g.validate()?;
        apply_postprocessors(&config.temporal_postprocessors, g)
    }
}
