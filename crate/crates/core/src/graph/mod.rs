//! Heterogeneous traffic graph: typed node and edge stores with dense
//! feature matrices, plus graph-level channels.

mod crg;
mod merge;
mod scan;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use crg::{deserialize, serialize, FORMAT_VERSION, MAGIC};
pub use merge::merge_window;
pub use scan::Violation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeType {
    #[serde(rename = "v")]
    Vehicle,
    #[serde(rename = "l")]
    Lanelet,
}

impl NodeType {
    pub fn key(self) -> &'static str {
        match self {
            NodeType::Vehicle => "v",
            NodeType::Lanelet => "l",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    L2L,
    V2V,
    V2L,
    L2V,
    VTV,
}

impl Relation {
    pub const ALL: [Relation; 5] = [Relation::L2L, Relation::V2V, Relation::V2L, Relation::L2V, Relation::VTV];

    pub fn key(self) -> &'static str {
        match self {
            Relation::L2L => "l2l",
            Relation::V2V => "v2v",
            Relation::V2L => "v2l",
            Relation::L2V => "l2v",
            Relation::VTV => "vtv",
        }
    }

    pub fn from_key(key: &str) -> Option<Relation> {
        Relation::ALL.into_iter().find(|r| r.key() == key)
    }

    pub fn source(self) -> NodeType {
        match self {
            Relation::L2L | Relation::L2V => NodeType::Lanelet,
            _ => NodeType::Vehicle,
        }
    }

    pub fn target(self) -> NodeType {
        match self {
            Relation::L2L | Relation::V2L => NodeType::Lanelet,
            _ => NodeType::Vehicle,
        }
    }
}

/// Addresses one store of a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StoreKey {
    Node(NodeType),
    Edge(Relation),
}

impl StoreKey {
    pub fn key(self) -> &'static str {
        match self {
            StoreKey::Node(n) => n.key(),
            StoreKey::Edge(r) => r.key(),
        }
    }

    pub fn from_key(key: &str) -> Option<StoreKey> {
        match key {
            "v" => Some(StoreKey::Node(NodeType::Vehicle)),
            "l" => Some(StoreKey::Node(NodeType::Lanelet)),
            other => Relation::from_key(other).map(StoreKey::Edge),
        }
    }
}

impl fmt::Display for StoreKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Channel {
    pub name: String,
    pub width: usize,
    pub unit: String,
}

impl Channel {
    pub fn new(name: impl Into<String>, width: usize, unit: impl Into<String>) -> Self {
        Self { name: name.into(), width, unit: unit.into() }
    }
}

/// Ordered, uniquely named column groups of one store.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChannelSchema {
    channels: Vec<Channel>,
}

impl ChannelSchema {
    pub fn new(channels: Vec<Channel>) -> Result<Self> {
        let mut schema = ChannelSchema::default();
        for c in channels {
            schema.push(c)?;
        }
        Ok(schema)
    }

    pub fn push(&mut self, channel: Channel) -> Result<()> {
        if self.channels.iter().any(|c| c.name == channel.name) {
            return Err(Error::Schema(format!("duplicate channel `{}`", channel.name)));
        }
        if channel.width == 0 {
            return Err(Error::Schema(format!("channel `{}` has zero width", channel.name)));
        }
        self.channels.push(channel);
        Ok(())
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    /// Total column count.
    pub fn width(&self) -> usize {
        self.channels.iter().map(|c| c.width).sum()
    }

    /// Column offset and width of a named channel.
    pub fn locate(&self, name: &str) -> Option<(usize, usize)> {
        let mut offset = 0;
        for c in &self.channels {
            if c.name == name {
                return Some((offset, c.width));
            }
            offset += c.width;
        }
        None
    }

    fn check_unique(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for c in &self.channels {
            if !seen.insert(&c.name) {
                return Err(Error::Schema(format!("duplicate channel `{}`", c.name)));
            }
        }
        Ok(())
    }
}

/// Channel layout for every store of a graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSchema {
    pub v: ChannelSchema,
    pub l: ChannelSchema,
    pub l2l: ChannelSchema,
    pub v2v: ChannelSchema,
    pub v2l: ChannelSchema,
    pub l2v: ChannelSchema,
    pub vtv: ChannelSchema,
}

impl GraphSchema {
    pub fn get(&self, key: StoreKey) -> &ChannelSchema {
        match key {
            StoreKey::Node(NodeType::Vehicle) => &self.v,
            StoreKey::Node(NodeType::Lanelet) => &self.l,
            StoreKey::Edge(Relation::L2L) => &self.l2l,
            StoreKey::Edge(Relation::V2V) => &self.v2v,
            StoreKey::Edge(Relation::V2L) => &self.v2l,
            StoreKey::Edge(Relation::L2V) => &self.l2v,
            StoreKey::Edge(Relation::VTV) => &self.vtv,
        }
    }

    pub fn get_mut(&mut self, key: StoreKey) -> &mut ChannelSchema {
        match key {
            StoreKey::Node(NodeType::Vehicle) => &mut self.v,
            StoreKey::Node(NodeType::Lanelet) => &mut self.l,
            StoreKey::Edge(Relation::L2L) => &mut self.l2l,
            StoreKey::Edge(Relation::V2V) => &mut self.v2v,
            StoreKey::Edge(Relation::V2L) => &mut self.v2l,
            StoreKey::Edge(Relation::L2V) => &mut self.l2v,
            StoreKey::Edge(Relation::VTV) => &mut self.vtv,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for key in all_store_keys() {
            self.get(key)
                .check_unique()
                .map_err(|e| Error::Schema(format!("store {key}: {e}")))?;
        }
        Ok(())
    }
}

pub fn all_store_keys() -> impl Iterator<Item = StoreKey> {
    [StoreKey::Node(NodeType::Vehicle), StoreKey::Node(NodeType::Lanelet)]
        .into_iter()
        .chain(Relation::ALL.into_iter().map(StoreKey::Edge))
}

/// Row-major `f32` matrix. Equality is bitwise so NaN padding compares equal.
#[derive(Debug, Clone, Default)]
pub struct FeatureMatrix {
    width: usize,
    values: Vec<f32>,
}

impl PartialEq for FeatureMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width
            && self.values.len() == other.values.len()
            && self.values.iter().zip(&other.values).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl FeatureMatrix {
    pub fn new(width: usize) -> Self {
        Self { width, values: Vec::new() }
    }

    pub fn from_values(width: usize, values: Vec<f32>) -> Result<Self> {
        if width == 0 && !values.is_empty() {
            return Err(Error::Schema("zero-width matrix with values".into()));
        }
        if width > 0 && values.len() % width != 0 {
            return Err(Error::Schema(format!("{} values do not fill rows of width {width}", values.len())));
        }
        Ok(Self { width, values })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Row count. A zero-width matrix reports zero rows; stores track their
    /// own cardinality.
    pub fn rows(&self) -> usize {
        if self.width == 0 {
            0
        } else {
            self.values.len() / self.width
        }
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.width..(i + 1) * self.width]
    }

    pub fn push_row(&mut self, row: &[f32]) -> Result<()> {
        if row.len() != self.width {
            return Err(Error::Schema(format!("row of width {} for matrix of width {}", row.len(), self.width)));
        }
        self.values.extend_from_slice(row);
        Ok(())
    }

    /// Keeps the rows with `keep[i]`.
    pub fn select(&self, keep: &[bool]) -> FeatureMatrix {
        let values = keep
            .iter()
            .enumerate()
            .filter(|(_, &k)| k)
            .flat_map(|(i, _)| self.row(i).iter().copied())
            .collect();
        FeatureMatrix { width: self.width, values }
    }

    /// Horizontally appends `other` (same row count).
    pub fn hstack(&self, other: &FeatureMatrix, rows: usize) -> Result<FeatureMatrix> {
        if self.width > 0 && self.rows() != rows || other.width > 0 && other.rows() != rows {
            return Err(Error::Schema("row count mismatch in column concatenation".into()));
        }
        let width = self.width + other.width;
        let mut values = Vec::with_capacity(rows * width);
        for i in 0..rows {
            if self.width > 0 {
                values.extend_from_slice(self.row(i));
            }
            if other.width > 0 {
                values.extend_from_slice(other.row(i));
            }
        }
        Ok(FeatureMatrix { width, values })
    }

    pub fn extend(&mut self, other: &FeatureMatrix) -> Result<()> {
        if other.width != self.width {
            return Err(Error::Schema("width mismatch in row concatenation".into()));
        }
        self.values.extend_from_slice(&other.values);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeStore {
    pub node_type: NodeType,
    /// External ids: vehicle or lanelet id.
    pub ids: Vec<i64>,
    /// Per-node integer metadata (`timestep` for vehicles, `valid_vertices`
    /// for lanelets), each array of node count length.
    pub aux: BTreeMap<String, Vec<i64>>,
    pub schema: ChannelSchema,
    pub x: FeatureMatrix,
}

pub const AUX_TIMESTEP: &str = "timestep";
pub const AUX_VALID_VERTICES: &str = "valid_vertices";

impl NodeStore {
    pub fn new(node_type: NodeType, schema: ChannelSchema) -> Self {
        let x = FeatureMatrix::new(schema.width());
        Self { node_type, ids: Vec::new(), aux: BTreeMap::new(), schema, x }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn timesteps(&self) -> Option<&[i64]> {
        self.aux.get(AUX_TIMESTEP).map(Vec::as_slice)
    }

    /// Feature values of `channel` for node `i`.
    pub fn channel(&self, i: usize, channel: &str) -> Option<&[f32]> {
        let (o, w) = self.schema.locate(channel)?;
        Some(&self.x.row(i)[o..o + w])
    }

    fn select(&self, keep: &[bool]) -> NodeStore {
        let pick = |v: &Vec<i64>| v.iter().zip(keep).filter(|(_, &k)| k).map(|(x, _)| *x).collect();
        NodeStore {
            node_type: self.node_type,
            ids: pick(&self.ids),
            aux: self.aux.iter().map(|(k, v)| (k.clone(), pick(v))).collect(),
            schema: self.schema.clone(),
            x: self.x.select(keep),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeStore {
    pub relation: Relation,
    pub sources: Vec<usize>,
    pub targets: Vec<usize>,
    pub schema: ChannelSchema,
    pub x: FeatureMatrix,
}

impl EdgeStore {
    pub fn new(relation: Relation, schema: ChannelSchema) -> Self {
        let x = FeatureMatrix::new(schema.width());
        Self { relation, sources: Vec::new(), targets: Vec::new(), schema, x }
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    pub fn endpoints(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.sources.iter().copied().zip(self.targets.iter().copied())
    }

    pub fn channel(&self, i: usize, channel: &str) -> Option<&[f32]> {
        let (o, w) = self.schema.locate(channel)?;
        Some(&self.x.row(i)[o..o + w])
    }
}

/// Graph-level channel, e.g. a scene indicator set by a postprocessor.
#[derive(Debug, Clone)]
pub struct GlobalFeature {
    pub name: String,
    pub values: Vec<f32>,
}

impl PartialEq for GlobalFeature {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.values.len() == other.values.len()
            && self.values.iter().zip(&other.values).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// Inclusive range of timesteps covered by a temporal graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub oldest: i64,
    pub newest: i64,
}

/// One graph sample. Temporal graphs carry a `window`, time-tagged vehicle
/// nodes spanning it and a `vtv` edge store.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficGraph {
    pub scenario_id: String,
    pub timestep: i64,
    /// Seconds per timestep of the source scenario.
    pub dt: f64,
    pub window: Option<Window>,
    pub vehicles: NodeStore,
    pub lanelets: NodeStore,
    pub edges: BTreeMap<Relation, EdgeStore>,
    pub globals: Vec<GlobalFeature>,
}

impl TrafficGraph {
    /// Empty single-timestep graph with the declared channels.
    pub fn new(scenario_id: impl Into<String>, timestep: i64, dt: f64, schema: &GraphSchema) -> Result<Self> {
        schema.validate()?;
        let edges = [Relation::L2L, Relation::V2V, Relation::V2L, Relation::L2V]
            .into_iter()
            .map(|r| (r, EdgeStore::new(r, schema.get(StoreKey::Edge(r)).clone())))
            .collect();
        let mut vehicles = NodeStore::new(NodeType::Vehicle, schema.v.clone());
        vehicles.aux.insert(AUX_TIMESTEP.into(), Vec::new());
        let mut lanelets = NodeStore::new(NodeType::Lanelet, schema.l.clone());
        lanelets.aux.insert(AUX_VALID_VERTICES.into(), Vec::new());
        Ok(Self {
            scenario_id: scenario_id.into(),
            timestep,
            dt,
            window: None,
            vehicles,
            lanelets,
            edges,
            globals: Vec::new(),
        })
    }

    pub fn is_temporal(&self) -> bool {
        self.window.is_some()
    }

    pub fn nodes(&self, t: NodeType) -> &NodeStore {
        match t {
            NodeType::Vehicle => &self.vehicles,
            NodeType::Lanelet => &self.lanelets,
        }
    }

    pub fn nodes_mut(&mut self, t: NodeType) -> &mut NodeStore {
        match t {
            NodeType::Vehicle => &mut self.vehicles,
            NodeType::Lanelet => &mut self.lanelets,
        }
    }

    pub fn edge_store(&self, r: Relation) -> Option<&EdgeStore> {
        self.edges.get(&r)
    }

    pub fn global(&self, name: &str) -> Option<&[f32]> {
        self.globals.iter().find(|g| g.name == name).map(|g| g.values.as_slice())
    }

    /// Adds or replaces a graph-level channel.
    pub fn set_global(&mut self, name: impl Into<String>, values: Vec<f32>) {
        let name = name.into();
        match self.globals.iter_mut().find(|g| g.name == name) {
            Some(g) => g.values = values,
            None => self.globals.push(GlobalFeature { name, values }),
        }
    }

    /// Schema of all stores present in this graph.
    pub fn schema(&self) -> GraphSchema {
        let mut s = GraphSchema {
            v: self.vehicles.schema.clone(),
            l: self.lanelets.schema.clone(),
            ..GraphSchema::default()
        };
        for (r, e) in &self.edges {
            *s.get_mut(StoreKey::Edge(*r)) = e.schema.clone();
        }
        s
    }

    /// Drops nodes of one type where `keep` is false and re-indexes every
    /// edge store; edges touching a dropped node are removed.
    pub fn retain_nodes(&mut self, node_type: NodeType, keep: &[bool]) -> Result<()> {
        let store = self.nodes(node_type);
        if keep.len() != store.len() {
            return Err(Error::Argument(format!(
                "retain mask has {} entries for {} nodes",
                keep.len(),
                store.len()
            )));
        }
        let mut remap = vec![None; keep.len()];
        let mut next = 0usize;
        for (i, &k) in keep.iter().enumerate() {
            if k {
                remap[i] = Some(next);
                next += 1;
            }
        }
        let selected = store.select(keep);
        *self.nodes_mut(node_type) = selected;
        for e in self.edges.values_mut() {
            let touches_src = e.relation.source() == node_type;
            let touches_dst = e.relation.target() == node_type;
            if !touches_src && !touches_dst {
                continue;
            }
            let mut edge_keep = Vec::with_capacity(e.len());
            let mut sources = Vec::new();
            let mut targets = Vec::new();
            for (s, t) in e.endpoints() {
                let s2 = if touches_src { remap.get(s).copied().flatten() } else { Some(s) };
                let t2 = if touches_dst { remap.get(t).copied().flatten() } else { Some(t) };
                match (s2, t2) {
                    (Some(a), Some(b)) => {
                        sources.push(a);
                        targets.push(b);
                        edge_keep.push(true);
                    }
                    _ => edge_keep.push(false),
                }
            }
            e.x = e.x.select(&edge_keep);
            e.sources = sources;
            e.targets = targets;
        }
        Ok(())
    }

    /// Vehicles tagged with `timestep` and the non-temporal edges among them,
    /// as a single-timestep graph.
    pub fn time_slice(&self, timestep: i64) -> Result<TrafficGraph> {
        let mut g = self.clone();
        g.edges.remove(&Relation::VTV);
        let keep: Vec<bool> = match g.vehicles.timesteps() {
            Some(ts) => ts.iter().map(|&t| t == timestep).collect(),
            None => vec![self.timestep == timestep; g.vehicles.len()],
        };
        g.retain_nodes(NodeType::Vehicle, &keep)?;
        g.window = None;
        g.timestep = timestep;
        Ok(g)
    }

    /// First structural invariant violation, if any.
    pub fn validate(&self) -> Result<()> {
        match scan::structural(self).into_iter().next() {
            None => Ok(()),
            Some(v) => Err(Error::Validation(v.to_string())),
        }
    }

    /// Full invariant scan: structure plus value-range checks on known
    /// channels.
    pub fn scan(&self) -> Vec<Violation> {
        let mut v = scan::structural(self);
        v.extend(scan::semantic(self));
        v
    }
}
