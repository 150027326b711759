//! Invariant scans over a finished graph.

use std::collections::HashSet;
use std::fmt;

use super::{NodeStore, NodeType, Relation, StoreKey, TrafficGraph, AUX_TIMESTEP};
use crate::features::channel;

/// One failed invariant, located by store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub store: String,
    pub message: String,
}

impl Violation {
    fn new(store: StoreKey, message: impl Into<String>) -> Self {
        Self { store: store.key().to_string(), message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.store, self.message)
    }
}

fn check_nodes(store: &NodeStore, out: &mut Vec<Violation>) {
    let key = StoreKey::Node(store.node_type);
    let n = store.len();
    if store.x.width() != store.schema.width() {
        out.push(Violation::new(key, format!("matrix width {} but schema width {}", store.x.width(), store.schema.width())));
    }
    if store.x.width() > 0 && store.x.rows() != n {
        out.push(Violation::new(key, format!("{} feature rows for {n} ids", store.x.rows())));
    }
    if store.x.width() == 0 && !store.x.values().is_empty() {
        out.push(Violation::new(key, "values in a zero-width matrix"));
    }
    for (name, column) in &store.aux {
        if column.len() != n {
            out.push(Violation::new(key, format!("metadata `{name}` has {} entries for {n} nodes", column.len())));
        }
    }
    let timesteps = match store.node_type {
        NodeType::Vehicle => store.timesteps().filter(|t| t.len() == n),
        NodeType::Lanelet => None,
    };
    let identity = |i: usize| (store.ids[i], timesteps.map_or(0, |t| t[i]));
    let mut seen = HashSet::with_capacity(n);
    for i in 0..n {
        if !seen.insert(identity(i)) {
            out.push(Violation::new(key, format!("duplicate node identity {:?}", identity(i))));
        }
        if i > 0 && identity(i - 1) > identity(i) {
            out.push(Violation::new(key, format!("node {i} out of (id, timestep) order")));
        }
    }
}

/// Shape, index-range, identity and VTV ordering checks.
pub(crate) fn structural(g: &TrafficGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    check_nodes(&g.vehicles, &mut out);
    check_nodes(&g.lanelets, &mut out);
    if g.vehicles.node_type != NodeType::Vehicle || g.lanelets.node_type != NodeType::Lanelet {
        out.push(Violation::new(StoreKey::Node(NodeType::Vehicle), "node stores carry the wrong node type"));
    }
    if let Some(w) = g.window {
        if w.oldest > w.newest || w.newest != g.timestep {
            out.push(Violation::new(StoreKey::Node(NodeType::Vehicle), format!("inconsistent window {w:?}")));
        }
        if let Some(ts) = g.vehicles.timesteps() {
            if let Some(t) = ts.iter().find(|&&t| t < w.oldest || t > w.newest) {
                out.push(Violation::new(StoreKey::Node(NodeType::Vehicle), format!("node timestep {t} outside window")));
            }
        }
    }
    for (&relation, e) in &g.edges {
        let key = StoreKey::Edge(relation);
        if e.relation != relation {
            out.push(Violation::new(key, "store filed under the wrong relation"));
        }
        if e.sources.len() != e.targets.len() {
            out.push(Violation::new(key, "source and target lists differ in length"));
            continue;
        }
        if e.x.width() != e.schema.width() {
            out.push(Violation::new(key, format!("matrix width {} but schema width {}", e.x.width(), e.schema.width())));
        }
        if e.x.width() > 0 && e.x.rows() != e.len() {
            out.push(Violation::new(key, format!("{} feature rows for {} edges", e.x.rows(), e.len())));
        }
        let ns = g.nodes(relation.source()).len();
        let nt = g.nodes(relation.target()).len();
        for (i, (s, t)) in e.endpoints().enumerate() {
            if s >= ns || t >= nt {
                out.push(Violation::new(key, format!("edge {i} endpoint ({s}, {t}) out of range")));
            }
        }
        if relation == Relation::L2L || relation == Relation::V2V {
            if let Some(i) = e.endpoints().position(|(s, t)| s == t) {
                out.push(Violation::new(key, format!("edge {i} is a self-loop")));
            }
        }
        if relation == Relation::VTV {
            let Some(ts) = g.vehicles.timesteps() else {
                out.push(Violation::new(key, "vehicle nodes carry no timesteps"));
                continue;
            };
            for (i, (s, t)) in e.endpoints().enumerate() {
                if s >= ns || t >= ns || ts.len() != ns {
                    continue;
                }
                if g.vehicles.ids[s] != g.vehicles.ids[t] {
                    out.push(Violation::new(key, format!("edge {i} joins different vehicles")));
                }
                if ts[t] - ts[s] <= 0 {
                    out.push(Violation::new(key, format!("edge {i} is not forward in time ({} -> {})", ts[s], ts[t])));
                }
            }
        }
    }
    if !g.vehicles.aux.contains_key(AUX_TIMESTEP) && g.edges.contains_key(&Relation::VTV) {
        out.push(Violation::new(StoreKey::Node(NodeType::Vehicle), "temporal graph without timestep metadata"));
    }
    out
}

/// Value-range checks on channels the base extractors define.
pub(crate) fn semantic(g: &TrafficGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    let pi = std::f32::consts::PI;
    let mut check_angles = |key: StoreKey, schema: &super::ChannelSchema, x: &super::FeatureMatrix, rows: usize| {
        for c in schema.channels().iter().filter(|c| c.unit == channel::RADIANS) {
            let (o, w) = schema.locate(&c.name).unwrap();
            for r in 0..rows.min(x.rows()) {
                for &v in &x.row(r)[o..o + w] {
                    if !(v.is_finite() && v > -pi - f32::EPSILON && v <= pi) {
                        out.push(Violation::new(key, format!("row {r}: angle `{}` = {v} outside (-pi, pi]", c.name)));
                    }
                }
            }
        }
    };
    check_angles(StoreKey::Node(NodeType::Vehicle), &g.vehicles.schema, &g.vehicles.x, g.vehicles.len());
    check_angles(StoreKey::Node(NodeType::Lanelet), &g.lanelets.schema, &g.lanelets.x, g.lanelets.len());
    for (&r, e) in &g.edges {
        check_angles(StoreKey::Edge(r), &e.schema, &e.x, e.len());
    }

    for r in [Relation::V2L, Relation::L2V] {
        let Some(e) = g.edges.get(&r) else { continue };
        if e.x.rows() != e.len() {
            continue;
        }
        for i in 0..e.len() {
            if let Some(&[v]) = e.channel(i, channel::ARCLENGTH_REL) {
                if !(0.0..=1.0).contains(&v) {
                    out.push(Violation::new(StoreKey::Edge(r), format!("edge {i}: normalized arclength {v} outside [0, 1]")));
                }
            }
            if let Some(&[v]) = e.channel(i, channel::ARCLENGTH) {
                if !(v >= 0.0) {
                    out.push(Violation::new(StoreKey::Edge(r), format!("edge {i}: negative arclength {v}")));
                }
            }
        }
    }

    if let (Some(e), Some(ts)) = (g.edges.get(&Relation::VTV), g.vehicles.timesteps()) {
        if e.x.rows() == e.len() {
            for (i, (s, t)) in e.endpoints().enumerate() {
                let Some(&[dt]) = e.channel(i, channel::TIME_DELTA) else { break };
                if !(dt > 0.0) {
                    out.push(Violation::new(StoreKey::Edge(Relation::VTV), format!("edge {i}: time delta {dt} is not positive")));
                } else if s < ts.len() && t < ts.len() {
                    let expected = ((ts[t] - ts[s]) as f64 * g.dt) as f32;
                    if dt != expected {
                        out.push(Violation::new(
                            StoreKey::Edge(Relation::VTV),
                            format!("edge {i}: time delta {dt} but timesteps imply {expected}"),
                        ));
                    }
                }
            }
        }
    }
    out
}
