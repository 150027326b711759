use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use super::{ExtractionConfig, Simulation};
use crate::builders::{build_l2l_edges, build_l2v_edges, build_v2l_edges, LaneletPolygons};
use crate::drawers::draw_v2v;
use crate::error::{Error, Result};
use crate::features::{
    l2l_row, lanelet_row, to_f32, v2l_row, v2v_row, vehicle_row, FeatureExtractor, StepContext,
};
use crate::graph::{
    EdgeStore, FeatureMatrix, GraphSchema, NodeStore, NodeType, Relation, StoreKey, TrafficGraph, AUX_TIMESTEP,
    AUX_VALID_VERTICES,
};
use crate::pipeline::apply_postprocessors;
use crate::scenario::Lanelet;

fn matrix(width: usize, rows: impl IntoIterator<Item = Vec<f32>>) -> FeatureMatrix {
    let values = rows.into_iter().flatten().collect();
    FeatureMatrix::from_values(width, values).expect("base rows match their schema")
}

/// Checks an extractor's output against its declaration.
pub(super) fn checked_rows(name: &str, declared: usize, expected_rows: usize, rows: Vec<Vec<f32>>) -> Result<FeatureMatrix> {
    if rows.len() != expected_rows {
        return Err(Error::component(
            "feature extractor",
            name,
            Error::Schema(format!("produced {} rows for {expected_rows} elements", rows.len())),
        ));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != declared) {
        return Err(Error::WidthMismatch { name: name.to_string(), declared, actual: bad.len() });
    }
    Ok(matrix(declared, rows))
}

/// Extracts single-timestep graphs from one scenario. The map-derived parts
/// (lanelet nodes, L2L edges, lanelet polygons) are computed once.
pub struct TrafficExtractor {
    config: ExtractionConfig,
    simulation: Arc<Simulation>,
    schema: GraphSchema,
    lanelet_ids: Vec<i64>,
    lanelet_index: HashMap<i64, usize>,
    lanelets: NodeStore,
    l2l: EdgeStore,
    polygons: LaneletPolygons,
    extractors: Vec<Box<dyn FeatureExtractor>>,
}

impl TrafficExtractor {
    pub fn new(config: ExtractionConfig, simulation: Arc<Simulation>) -> Result<Self> {
        config.validate(false)?;
        let schema = config.schema()?;
        let scenario = simulation.scenario();
        let network = &scenario.lanelets;
        let lanelet_ids: Vec<i64> = network.keys().copied().collect();
        let lanelet_index: HashMap<i64, usize> = lanelet_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();

        let mut lanelets = NodeStore::new(NodeType::Lanelet, schema.l.clone());
        let mut valid = Vec::with_capacity(network.len());
        let mut rows = Vec::with_capacity(network.len());
        for l in network.values() {
            let (row, n) = lanelet_row(l, config.n_pad);
            rows.push(to_f32(&row));
            valid.push(n as i64);
        }
        lanelets.ids = lanelet_ids.clone();
        lanelets.aux.insert(AUX_VALID_VERTICES.into(), valid);
        lanelets.x = matrix(crate::features::lanelet_schema(config.n_pad).width(), rows);

        let mut l2l = EdgeStore::new(Relation::L2L, schema.l2l.clone());
        let records = build_l2l_edges(network, &config.l2l_types);
        let mut l2l_rows = Vec::with_capacity(records.len());
        for r in &records {
            l2l.sources.push(lanelet_index[&r.source]);
            l2l.targets.push(lanelet_index[&r.target]);
            l2l_rows.push(to_f32(&l2l_row(r, &network[&r.source], &network[&r.target])));
        }
        l2l.x = matrix(crate::features::l2l_schema().width(), l2l_rows);

        let polygons = LaneletPolygons::new(network)?;
        let mut extractors: Vec<Box<dyn FeatureExtractor>> = config.extractors.iter().map(|f| f.make()).collect();
        for e in &mut extractors {
            e.reset();
        }
        Ok(Self { config, simulation, schema, lanelet_ids, lanelet_index, lanelets, l2l, polygons, extractors })
    }

    pub fn schema(&self) -> &GraphSchema {
        &self.schema
    }

    pub fn simulation(&self) -> &Arc<Simulation> {
        &self.simulation
    }

    pub fn config(&self) -> &ExtractionConfig {
        &self.config
    }

    /// Graph at `timestep`: state, V2V edges, map edges, features, metadata,
    /// then postprocessors.
    pub fn extract(&mut self, timestep: i64) -> Result<TrafficGraph> {
        let sim = Arc::clone(&self.simulation);
        let scenario = sim.scenario();
        let vehicles = sim.vehicles_at(timestep)?;

        let positions: Vec<(i64, crate::geometry::Vec2)> = vehicles.iter().map(|v| (v.id, v.state.position)).collect();
        let v2v = draw_v2v(&self.config.v2v, &positions);

        let vehicle_index: HashMap<i64, usize> = vehicles.iter().enumerate().map(|(i, v)| (v.id, i)).collect();
        let v2l: Vec<(usize, usize)> = build_v2l_edges(&vehicles, &self.polygons, self.config.v2l_strategy)
            .into_iter()
            .map(|(v, l)| (vehicle_index[&v], self.lanelet_index[&l]))
            .collect();
        let l2v: Vec<(usize, usize)> = build_l2v_edges(&v2l);

        let network = &scenario.lanelets;
        let lanelet_refs: Vec<&Lanelet> = self.lanelet_ids.iter().map(|id| &network[id]).collect();

        let mut columns: BTreeMap<StoreKey, FeatureMatrix> = BTreeMap::new();
        columns.insert(
            StoreKey::Node(NodeType::Vehicle),
            matrix(10, vehicles.iter().map(|v| to_f32(&vehicle_row(v)))),
        );
        columns.insert(StoreKey::Node(NodeType::Lanelet), self.lanelets.x.clone());
        columns.insert(StoreKey::Edge(Relation::L2L), self.l2l.x.clone());
        columns.insert(
            StoreKey::Edge(Relation::V2V),
            matrix(8, v2v.iter().map(|&(s, t)| to_f32(&v2v_row(&vehicles[s].state, &vehicles[t].state)))),
        );
        let v2l_rows: Vec<Vec<f32>> = v2l
            .iter()
            .map(|&(v, l)| {
                let s = &vehicles[v].state;
                to_f32(&v2l_row(s.position, s.orientation, lanelet_refs[l]))
            })
            .collect();
        columns.insert(StoreKey::Edge(Relation::V2L), matrix(6, v2l_rows.clone()));
        columns.insert(StoreKey::Edge(Relation::L2V), matrix(6, v2l_rows));

        let edge_lists: BTreeMap<Relation, Vec<(usize, usize)>> = [
            (Relation::L2L, self.l2l.endpoints().collect()),
            (Relation::V2V, v2v),
            (Relation::V2L, v2l),
            (Relation::L2V, l2v),
        ]
        .into();

        let ctx = StepContext {
            scenario,
            timestep,
            vehicles: &vehicles,
            lanelets: &lanelet_refs,
            edges: &edge_lists,
        };
        for e in &mut self.extractors {
            let store = e.store();
            let declared: usize = e.channels().iter().map(|c| c.width).sum();
            let rows = e.extract(&ctx).map_err(|err| Error::component("feature extractor", e.name(), err))?;
            let extra = checked_rows(e.name(), declared, ctx.rows(store), rows)?;
            let base = columns.get_mut(&store).expect("every store has a matrix");
            *base = base.hstack(&extra, ctx.rows(store))?;
        }

        let mut g = TrafficGraph::new(scenario.id.clone(), timestep, scenario.dt, &self.schema)?;
        g.vehicles.ids = vehicles.iter().map(|v| v.id).collect();
        g.vehicles.aux.insert(AUX_TIMESTEP.into(), vec![timestep; vehicles.len()]);
        g.vehicles.x = columns.remove(&StoreKey::Node(NodeType::Vehicle)).unwrap();
        g.lanelets.ids = self.lanelets.ids.clone();
        g.lanelets.aux = self.lanelets.aux.clone();
        g.lanelets.x = columns.remove(&StoreKey::Node(NodeType::Lanelet)).unwrap();
        for (relation, pairs) in edge_lists {
            let store = g.edges.get_mut(&relation).expect("single-step relations exist");
            store.sources = pairs.iter().map(|p| p.0).collect();
            store.targets = pairs.iter().map(|p| p.1).collect();
            store.x = columns.remove(&StoreKey::Edge(relation)).unwrap();
        }
        g.validate()?;
        apply_postprocessors(&self.config.postprocessors, g)
    }
}
