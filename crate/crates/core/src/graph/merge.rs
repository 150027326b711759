use std::collections::{BTreeMap, HashMap};

use super::{ChannelSchema, EdgeStore, FeatureMatrix, NodeStore, NodeType, Relation, TrafficGraph, Window, AUX_TIMESTEP};
use crate::error::{Error, Result};

/// Merges a chronological run of single-timestep graphs into one temporal
/// graph. Vehicle nodes are repeated per timestep and ordered by
/// (id, timestep); lanelets, L2L edges and globals come from the newest
/// graph. The VTV store is created empty.
pub fn merge_window(graphs: &[TrafficGraph]) -> Result<TrafficGraph> {
    let newest = graphs.last().ok_or_else(|| Error::Merge("empty window".into()))?;
    let schema = newest.schema();
    for pair in graphs.windows(2) {
        if pair[1].timestep <= pair[0].timestep {
            return Err(Error::Merge(format!(
                "timesteps not strictly increasing: {} then {}",
                pair[0].timestep, pair[1].timestep
            )));
        }
    }
    for g in graphs {
        if g.scenario_id != newest.scenario_id {
            return Err(Error::Merge(format!(
                "mixed scenarios `{}` and `{}`",
                g.scenario_id, newest.scenario_id
            )));
        }
        if g.is_temporal() {
            return Err(Error::Merge(format!("graph at t={} is already temporal", g.timestep)));
        }
        if g.schema() != schema || g.edges.keys().ne(newest.edges.keys()) {
            return Err(Error::Merge(format!("schema of graph at t={} differs from the newest graph", g.timestep)));
        }
        if g.vehicles.aux.keys().ne(newest.vehicles.aux.keys()) {
            return Err(Error::Merge(format!("vehicle metadata of graph at t={} differs", g.timestep)));
        }
        if g.dt != newest.dt {
            return Err(Error::Merge(format!("graph at t={} has a different dt", g.timestep)));
        }
    }

    // (id, timestep, graph, row) sorted by identity
    let mut order: Vec<(i64, i64, usize, usize)> = Vec::new();
    for (gi, g) in graphs.iter().enumerate() {
        for (row, &id) in g.vehicles.ids.iter().enumerate() {
            order.push((id, g.timestep, gi, row));
        }
    }
    order.sort_unstable();
    let mut vehicle_map: Vec<Vec<usize>> = graphs.iter().map(|g| vec![0; g.vehicles.len()]).collect();
    let mut vehicles = NodeStore::new(newest.vehicles.node_type, schema.v.clone());
    let mut values = Vec::with_capacity(order.len() * schema.v.width());
    for key in newest.vehicles.aux.keys() {
        vehicles.aux.insert(key.clone(), Vec::with_capacity(order.len()));
    }
    for (new_index, &(id, t, gi, row)) in order.iter().enumerate() {
        vehicle_map[gi][row] = new_index;
        vehicles.ids.push(id);
        let src = &graphs[gi].vehicles;
        for (key, column) in vehicles.aux.iter_mut() {
            column.push(if key == AUX_TIMESTEP { t } else { src.aux[key][row] });
        }
        if schema.v.width() > 0 {
            values.extend_from_slice(src.x.row(row));
        }
    }
    vehicles.x = FeatureMatrix::from_values(schema.v.width(), values)?;
    vehicles.aux.entry(AUX_TIMESTEP.to_string()).or_insert_with(|| order.iter().map(|o| o.1).collect());

    let lanelet_index: HashMap<i64, usize> =
        newest.lanelets.ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut lanelet_map = Vec::with_capacity(graphs.len());
    for g in graphs {
        let map = g
            .lanelets
            .ids
            .iter()
            .map(|id| {
                lanelet_index.get(id).copied().ok_or_else(|| {
                    Error::Merge(format!("lanelet {id} at t={} is missing from the newest graph", g.timestep))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        lanelet_map.push(map);
    }

    let mut edges = BTreeMap::new();
    for (&relation, newest_store) in &newest.edges {
        if relation == Relation::L2L {
            edges.insert(relation, newest_store.clone());
            continue;
        }
        let mut store = EdgeStore::new(relation, newest_store.schema.clone());
        for (gi, g) in graphs.iter().enumerate() {
            let e = &g.edges[&relation];
            let remap = |node_type, i: usize| match node_type {
                NodeType::Vehicle => vehicle_map[gi][i],
                NodeType::Lanelet => lanelet_map[gi][i],
            };
            for (s, t) in e.endpoints() {
                store.sources.push(remap(relation.source(), s));
                store.targets.push(remap(relation.target(), t));
            }
            store.x.extend(&e.x)?;
        }
        edges.insert(relation, store);
    }
    edges.insert(Relation::VTV, EdgeStore::new(Relation::VTV, ChannelSchema::default()));

    Ok(TrafficGraph {
        scenario_id: newest.scenario_id.clone(),
        timestep: newest.timestep,
        dt: newest.dt,
        window: Some(Window { oldest: graphs[0].timestep, newest: newest.timestep }),
        vehicles,
        lanelets: newest.lanelets.clone(),
        edges,
        globals: newest.globals.clone(),
    })
}
