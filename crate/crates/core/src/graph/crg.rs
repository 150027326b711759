//! `.crg` sample files: magic, version, header length, a JSON header and
//! 8-byte aligned little-endian tensor payloads.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    ChannelSchema, EdgeStore, FeatureMatrix, GlobalFeature, NodeStore, NodeType, Relation, StoreKey,
    TrafficGraph, Window,
};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"CRG1";
pub const FORMAT_VERSION: u32 = 1;
const PREFIX: usize = 16;
const GLOBALS: &str = "globals";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Dtype {
    F32,
    I64,
}

#[derive(Debug, Serialize, Deserialize)]
struct TensorDesc {
    store: String,
    name: String,
    dtype: Dtype,
    shape: Vec<usize>,
    offset: u64,
    length: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct RelationDesc {
    name: Relation,
    src: NodeType,
    dst: NodeType,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    scenario_id: String,
    timestep: i64,
    dt: f64,
    window: Option<Window>,
    schema: BTreeMap<String, ChannelSchema>,
    relations: Vec<RelationDesc>,
    tensors: Vec<TensorDesc>,
}

#[derive(Default)]
struct Payload {
    bytes: Vec<u8>,
    tensors: Vec<TensorDesc>,
}

impl Payload {
    fn push(&mut self, store: &str, name: &str, dtype: Dtype, shape: Vec<usize>, data: Vec<u8>) {
        let offset = self.bytes.len();
        self.tensors.push(TensorDesc {
            store: store.into(),
            name: name.into(),
            dtype,
            shape,
            offset: offset as u64,
            length: data.len() as u64,
        });
        self.bytes.extend_from_slice(&data);
        let pad = (8 - self.bytes.len() % 8) % 8;
        self.bytes.resize(self.bytes.len() + pad, 0);
    }

    fn push_i64(&mut self, store: &str, name: &str, shape: Vec<usize>, values: impl Iterator<Item = i64>) {
        let data = values.flat_map(i64::to_le_bytes).collect();
        self.push(store, name, Dtype::I64, shape, data);
    }

    fn push_f32(&mut self, store: &str, name: &str, shape: Vec<usize>, values: &[f32]) {
        let data = values.iter().flat_map(|v| v.to_le_bytes()).collect();
        self.push(store, name, Dtype::F32, shape, data);
    }

    fn push_nodes(&mut self, store: &NodeStore) {
        let key = store.node_type.key();
        let n = store.len();
        self.push_i64(key, "id", vec![n], store.ids.iter().copied());
        for (name, values) in &store.aux {
            self.push_i64(key, name, vec![n], values.iter().copied());
        }
        self.push_f32(key, "x", vec![n, store.schema.width()], store.x.values());
    }

    fn push_edges(&mut self, store: &EdgeStore) {
        let key = store.relation.key();
        let e = store.len();
        let index = store.sources.iter().chain(&store.targets).map(|&i| i as i64);
        self.push_i64(key, "edge_index", vec![2, e], index);
        self.push_f32(key, "x", vec![e, store.schema.width()], store.x.values());
    }
}

/// Encodes a graph. Stores are written in a fixed order so equal graphs give
/// equal bytes.
pub fn serialize(graph: &TrafficGraph) -> Vec<u8> {
    let mut payload = Payload::default();
    payload.push_nodes(&graph.vehicles);
    payload.push_nodes(&graph.lanelets);
    for store in graph.edges.values() {
        payload.push_edges(store);
    }
    for g in &graph.globals {
        payload.push_f32(GLOBALS, &g.name, vec![g.values.len()], &g.values);
    }

    let mut schema = BTreeMap::new();
    schema.insert(NodeType::Vehicle.key().to_string(), graph.vehicles.schema.clone());
    schema.insert(NodeType::Lanelet.key().to_string(), graph.lanelets.schema.clone());
    for (r, e) in &graph.edges {
        schema.insert(r.key().to_string(), e.schema.clone());
    }
    let header = Header {
        scenario_id: graph.scenario_id.clone(),
        timestep: graph.timestep,
        dt: graph.dt,
        window: graph.window,
        schema,
        relations: graph
            .edges
            .keys()
            .map(|&r| RelationDesc { name: r, src: r.source(), dst: r.target() })
            .collect(),
        tensors: payload.tensors,
    };
    let mut json = serde_json::to_vec(&header).expect("header serializes");
    let pad = (8 - (PREFIX + json.len()) % 8) % 8;
    json.resize(json.len() + pad, b' ');

    let mut out = Vec::with_capacity(PREFIX + json.len() + payload.bytes.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&payload.bytes);
    out
}

struct Tensors<'a> {
    payload: &'a [u8],
    by_key: BTreeMap<(String, String), &'a TensorDesc>,
}

impl<'a> Tensors<'a> {
    fn raw(&self, store: &str, name: &str, dtype: Dtype) -> Result<(&'a [u8], &'a [usize])> {
        let desc = self
            .by_key
            .get(&(store.to_string(), name.to_string()))
            .ok_or_else(|| Error::Format(format!("missing tensor {store}/{name}")))?;
        if desc.dtype != dtype {
            return Err(Error::Format(format!("tensor {store}/{name} has dtype {:?}", desc.dtype)));
        }
        let count: usize = desc.shape.iter().product();
        if desc.length != (count * 8 / if dtype == Dtype::F32 { 2 } else { 1 }) as u64 {
            return Err(Error::Format(format!("tensor {store}/{name} length disagrees with its shape")));
        }
        let start = desc.offset as usize;
        let end = start
            .checked_add(desc.length as usize)
            .filter(|&e| e <= self.payload.len())
            .ok_or_else(|| Error::Format(format!("tensor {store}/{name} exceeds the payload")))?;
        Ok((&self.payload[start..end], &desc.shape))
    }

    fn i64s(&self, store: &str, name: &str) -> Result<(Vec<i64>, Vec<usize>)> {
        let (bytes, shape) = self.raw(store, name, Dtype::I64)?;
        let v = bytes.chunks_exact(8).map(|c| i64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok((v, shape.to_vec()))
    }

    fn f32s(&self, store: &str, name: &str) -> Result<(Vec<f32>, Vec<usize>)> {
        let (bytes, shape) = self.raw(store, name, Dtype::F32)?;
        let v = bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        Ok((v, shape.to_vec()))
    }

    fn matrix(&self, store: &str, rows: usize, schema: &ChannelSchema) -> Result<FeatureMatrix> {
        let (values, shape) = self.f32s(store, "x")?;
        if shape != [rows, schema.width()] {
            return Err(Error::Format(format!("feature matrix of {store} has shape {shape:?}")));
        }
        FeatureMatrix::from_values(schema.width(), values)
    }

    fn nodes(&self, node_type: NodeType, schema: ChannelSchema, aux_names: &[&str]) -> Result<NodeStore> {
        let key = node_type.key();
        let (ids, shape) = self.i64s(key, "id")?;
        if shape.len() != 1 {
            return Err(Error::Format(format!("id tensor of {key} is not one-dimensional")));
        }
        let n = ids.len();
        let mut aux = BTreeMap::new();
        for name in aux_names {
            let (values, _) = self.i64s(key, name)?;
            if values.len() != n {
                return Err(Error::Format(format!("{key}/{name} has {} entries for {n} nodes", values.len())));
            }
            aux.insert(name.to_string(), values);
        }
        let x = self.matrix(key, n, &schema)?;
        Ok(NodeStore { node_type, ids, aux, schema, x })
    }

    fn edges(&self, relation: Relation, schema: ChannelSchema) -> Result<EdgeStore> {
        let key = relation.key();
        let (index, shape) = self.i64s(key, "edge_index")?;
        if shape.len() != 2 || shape[0] != 2 {
            return Err(Error::Format(format!("edge_index of {key} has shape {shape:?}")));
        }
        let e = shape[1];
        let to_usize = |v: i64| usize::try_from(v).map_err(|_| Error::Format(format!("negative index in {key}")));
        let sources = index[..e].iter().map(|&v| to_usize(v)).collect::<Result<_>>()?;
        let targets = index[e..].iter().map(|&v| to_usize(v)).collect::<Result<_>>()?;
        let x = self.matrix(key, e, &schema)?;
        Ok(EdgeStore { relation, sources, targets, schema, x })
    }
}

/// Decodes a `.crg` buffer.
pub fn deserialize(bytes: &[u8]) -> Result<TrafficGraph> {
    if bytes.len() < PREFIX || &bytes[..4] != MAGIC {
        return Err(Error::Format("not a CRG1 sample file".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported format version {version}")));
    }
    let header_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let payload_start = PREFIX
        .checked_add(header_len)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| Error::Format("header length exceeds file size".into()))?;
    let header: Header = serde_json::from_slice(&bytes[PREFIX..payload_start])
        .map_err(|e| Error::Format(format!("invalid header: {e}")))?;

    let mut by_key = BTreeMap::new();
    for t in &header.tensors {
        if by_key.insert((t.store.clone(), t.name.clone()), t).is_some() {
            return Err(Error::Format(format!("duplicate tensor {}/{}", t.store, t.name)));
        }
    }
    let tensors = Tensors { payload: &bytes[payload_start..], by_key };

    let mut schema = header.schema;
    let mut take_schema = |key: StoreKey| {
        schema
            .remove(key.key())
            .ok_or_else(|| Error::Format(format!("header lacks the schema of store {key}")))
    };
    let aux_of = |store: &str| -> Vec<&str> {
        header
            .tensors
            .iter()
            .filter(|t| t.store == store && t.dtype == Dtype::I64 && t.name != "id")
            .map(|t| t.name.as_str())
            .collect()
    };
    let vehicles = tensors.nodes(NodeType::Vehicle, take_schema(StoreKey::Node(NodeType::Vehicle))?, &aux_of("v"))?;
    let lanelets = tensors.nodes(NodeType::Lanelet, take_schema(StoreKey::Node(NodeType::Lanelet))?, &aux_of("l"))?;
    let mut edges = BTreeMap::new();
    for r in &header.relations {
        if r.src != r.name.source() || r.dst != r.name.target() {
            return Err(Error::Format(format!("relation {} declares wrong endpoint types", r.name.key())));
        }
        let store = tensors.edges(r.name, take_schema(StoreKey::Edge(r.name))?)?;
        if edges.insert(r.name, store).is_some() {
            return Err(Error::Format(format!("relation {} listed twice", r.name.key())));
        }
    }
    let globals = header
        .tensors
        .iter()
        .filter(|t| t.store == GLOBALS)
        .map(|t| Ok(GlobalFeature { name: t.name.clone(), values: tensors.f32s(GLOBALS, &t.name)?.0 }))
        .collect::<Result<_>>()?;

    Ok(TrafficGraph {
        scenario_id: header.scenario_id,
        timestep: header.timestep,
        dt: header.dt,
        window: header.window,
        vehicles,
        lanelets,
        edges,
        globals,
    })
}
