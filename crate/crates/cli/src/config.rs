//! The run configuration document and its resolution into library types.
//!
//! Parsing is deliberately lenient: names are read as strings and unknown keys
//! are collected instead of failing fast, so one pass reports every problem.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};
use trafficgraph::builders::{L2LAdjacencyType, V2LAssignmentStrategy};
use trafficgraph::dataset::{CollectorConfig, ErrorPolicy};
use trafficgraph::drawers::{V2VDrawerConfig, V2VDrawerKind, VTVDrawerConfig};
use trafficgraph::extractor::{ExtractionConfig, ExtractorFactory, TemporalExtractorFactory};
use trafficgraph::pipeline::{
    Postprocessor, RemoveOffroadVehicles, SegmentLanelets, TrafficFilter, TrafficJam, TransformChain,
};

/// Keys that say where and how to run but not what to produce. They are left
/// out of the dataset fingerprint.
const RUN_ONLY_KEYS: &[&str] = &["output", "workers", "overwrite"];

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct RawConfig {
    inputs: Vec<PathBuf>,
    output: Option<PathBuf>,
    transforms: Vec<RawComponent>,
    v2v: RawV2V,
    vtv: RawVTV,
    l2l_types: Option<Vec<String>>,
    v2l_strategy: Option<String>,
    features: RawFeatures,
    postprocessors: Vec<RawComponent>,
    temporal_postprocessors: Vec<RawComponent>,
    collector: RawCollector,
    error_policy: Option<String>,
    workers: usize,
    overwrite: bool,
}

#[derive(Debug, Default, Deserialize)]
struct RawComponent {
    name: String,
    #[serde(default)]
    params: Map<String, Value>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct RawV2V {
    kind: Option<String>,
    k: Option<usize>,
    radius: Option<f64>,
    max_distance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct RawVTV {
    max_horizon: Option<i64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct RawFeatures {
    n_pad: Option<usize>,
    extractors: Vec<String>,
    temporal_extractors: Vec<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct RawCollector {
    timesteps: Option<usize>,
    stride: Option<usize>,
    temporal: bool,
    skip_warmup: bool,
    cache_size: Option<usize>,
}

/// Every problem found in a configuration document.
#[derive(Debug)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid run configuration ({} problem{}):", self.0.len(), if self.0.len() == 1 { "" } else { "s" })?;
        for e in &self.0 {
            write!(f, "\n  - {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// A fully resolved run.
pub struct RunConfiguration {
    pub inputs: Vec<PathBuf>,
    pub output: Option<PathBuf>,
    pub chain: TransformChain,
    pub collector: CollectorConfig,
    pub extraction: ExtractionConfig,
    pub error_policy: ErrorPolicy,
    pub workers: usize,
    pub overwrite: bool,
    /// The document minus run-only keys, hashed into the fingerprint.
    pub document: Value,
}

impl fmt::Debug for RunConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RunConfiguration")
            .field("inputs", &self.inputs)
            .field("output", &self.output)
            .field("chain", &self.chain)
            .field("collector", &self.collector)
            .field("extraction", &self.extraction)
            .finish_non_exhaustive()
    }
}

impl RunConfiguration {
    /// Reads a document from disk. Relative paths inside it resolve against
    /// the document's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigErrors> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigErrors(vec![format!("cannot read {}: {e}", path.display())]))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigErrors> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| ConfigErrors(vec![format!("not valid JSON: {e}")]))?;
        let mut errors = Vec::new();
        let mut unknown = Vec::new();
        let raw: RawConfig = serde_ignored::deserialize(&value, |p| unknown.push(p.to_string()))
            .map_err(|e| ConfigErrors(vec![e.to_string()]))?;
        errors.extend(unknown.into_iter().map(|p| format!("{p}: unknown key")));

        let chain = resolve_chain(&raw.transforms, &mut errors);
        let v2v = resolve_v2v(&raw.v2v, &mut errors);
        let mut vtv = VTVDrawerConfig::default();
        if let Some(h) = raw.vtv.max_horizon {
            vtv.max_horizon = h;
        }
        let l2l_types = match &raw.l2l_types {
            None => L2LAdjacencyType::all(),
            Some(names) => names
                .iter()
                .enumerate()
                .filter_map(|(i, n)| enum_value::<L2LAdjacencyType>(&format!("l2l_types[{i}]"), n, L2L_NAMES, &mut errors))
                .collect::<BTreeSet<_>>(),
        };
        let v2l_strategy = raw
            .v2l_strategy
            .as_deref()
            .and_then(|n| enum_value::<V2LAssignmentStrategy>("v2l_strategy", n, &["center", "shape"], &mut errors))
            .unwrap_or_default();
        let error_policy = raw
            .error_policy
            .as_deref()
            .and_then(|n| enum_value::<ErrorPolicy>("error_policy", n, &["abort", "skip"], &mut errors))
            .unwrap_or_default();

        let mut extraction = ExtractionConfig { v2v, vtv, l2l_types, v2l_strategy, ..ExtractionConfig::default() };
        if let Some(n) = raw.features.n_pad {
            extraction.n_pad = n;
        }
        if let Some(n) = raw.collector.cache_size {
            extraction.cache_size = n;
        }
        for (i, name) in raw.features.extractors.iter().enumerate() {
            match ExtractorFactory::builtin(name) {
                Some(f) => extraction.extractors.push(f),
                None => errors.push(format!("features.extractors[{i}]: unknown feature extractor `{name}`")),
            }
        }
        for (i, name) in raw.features.temporal_extractors.iter().enumerate() {
            match TemporalExtractorFactory::builtin(name) {
                Some(f) => extraction.temporal_extractors.push(f),
                None => errors.push(format!("features.temporal_extractors[{i}]: unknown temporal feature extractor `{name}`")),
            }
        }
        extraction.postprocessors = resolve_postprocessors("postprocessors", &raw.postprocessors, &mut errors);
        extraction.temporal_postprocessors =
            resolve_postprocessors("temporal_postprocessors", &raw.temporal_postprocessors, &mut errors);

        let mut collector = CollectorConfig {
            timesteps: raw.collector.timesteps,
            temporal: raw.collector.temporal,
            skip_warmup: raw.collector.skip_warmup,
            ..CollectorConfig::default()
        };
        if let Some(s) = raw.collector.stride {
            collector.stride = s;
        }
        if let Err(e) = collector.validate() {
            errors.push(format!("collector: {e}"));
        }
        if let Err(e) = extraction.validate(collector.temporal) {
            errors.push(e.to_string());
        }
        if raw.inputs.is_empty() {
            errors.push("inputs: at least one scenario file or directory is required".into());
        }

        if !errors.is_empty() {
            return Err(ConfigErrors(errors));
        }
        let mut document = value;
        if let Some(map) = document.as_object_mut() {
            for key in RUN_ONLY_KEYS {
                map.remove(*key);
            }
        }
        Ok(Self {
            inputs: raw.inputs.iter().map(|p| base.join(p)).collect(),
            output: raw.output.map(|p| base.join(p)),
            chain,
            collector,
            extraction,
            error_policy,
            workers: raw.workers,
            overwrite: raw.overwrite,
            document,
        })
    }
}

const L2L_NAMES: &[&str] =
    &["predecessor", "successor", "adjacent_left", "adjacent_right", "merging", "diverging", "conflicting"];
const V2V_NAMES: &[&str] = &["voronoi", "k_nearest", "fully_connected", "radius"];

fn enum_value<T: DeserializeOwned>(field: &str, name: &str, known: &[&str], errors: &mut Vec<String>) -> Option<T> {
    match serde_json::from_value(Value::String(name.to_string())) {
        Ok(v) => Some(v),
        Err(_) => {
            errors.push(format!("{field}: unknown value `{name}` (expected one of {})", known.join(", ")));
            None
        }
    }
}

fn resolve_v2v(raw: &RawV2V, errors: &mut Vec<String>) -> V2VDrawerConfig {
    let mut cfg = V2VDrawerConfig::default();
    if let Some(kind) = &raw.kind {
        cfg.kind = enum_value::<V2VDrawerKind>("v2v.kind", kind, V2V_NAMES, errors).unwrap_or_default();
    }
    if let Some(k) = raw.k {
        cfg.k = k;
    }
    if let Some(r) = raw.radius {
        cfg.radius = r;
    }
    cfg.max_distance = raw.max_distance;
    cfg
}

/// Typed parameter access that records missing, mistyped and unexpected keys.
struct Params<'a> {
    field: String,
    map: &'a Map<String, Value>,
    used: BTreeSet<&'static str>,
}

impl<'a> Params<'a> {
    fn new(field: String, map: &'a Map<String, Value>) -> Self {
        Self { field, map, used: BTreeSet::new() }
    }

    fn get<T: DeserializeOwned>(&mut self, key: &'static str, default: Option<T>, errors: &mut Vec<String>) -> Option<T> {
        self.used.insert(key);
        match self.map.get(key) {
            None if default.is_some() => default,
            None => {
                errors.push(format!("{}.params.{key}: required", self.field));
                None
            }
            Some(v) => match serde_json::from_value(v.clone()) {
                Ok(x) => Some(x),
                Err(e) => {
                    errors.push(format!("{}.params.{key}: {e}", self.field));
                    None
                }
            },
        }
    }

    fn finish(self, errors: &mut Vec<String>) {
        for key in self.map.keys() {
            if !self.used.contains(key.as_str()) {
                errors.push(format!("{}.params.{key}: unknown parameter", self.field));
            }
        }
    }
}

fn resolve_chain(list: &[RawComponent], errors: &mut Vec<String>) -> TransformChain {
    let mut chain = TransformChain::new();
    for (i, c) in list.iter().enumerate() {
        let field = format!("transforms[{i}]");
        let mut p = Params::new(field.clone(), &c.params);
        match c.name.as_str() {
            "traffic_filter" => {
                if let Some(min) = p.get("min", None, errors) {
                    chain.push(TrafficFilter::new(min).into());
                }
            }
            "segment_lanelets" => {
                if let Some(size) = p.get::<f64>("size", None, errors) {
                    if size.is_finite() && size > 0.0 {
                        chain.push(SegmentLanelets::new(size).into());
                    } else {
                        errors.push(format!("{field}.params.size: must be positive, got {size}"));
                    }
                }
            }
            other => {
                errors.push(format!(
                    "{field}.name: unknown transform `{other}` (expected one of traffic_filter, segment_lanelets)"
                ));
                continue;
            }
        }
        p.finish(errors);
    }
    chain
}

fn resolve_postprocessors(key: &str, list: &[RawComponent], errors: &mut Vec<String>) -> Vec<Arc<dyn Postprocessor>> {
    let mut out: Vec<Arc<dyn Postprocessor>> = Vec::new();
    for (i, c) in list.iter().enumerate() {
        let field = format!("{key}[{i}]");
        let mut p = Params::new(field.clone(), &c.params);
        match c.name.as_str() {
            "traffic_jam" => {
                let d = TrafficJam::default();
                let speed = p.get("max_mean_speed", Some(d.max_mean_speed), errors);
                let count = p.get("min_vehicles", Some(d.min_vehicles), errors);
                if let (Some(max_mean_speed), Some(min_vehicles)) = (speed, count) {
                    out.push(Arc::new(TrafficJam { max_mean_speed, min_vehicles }));
                }
            }
            "remove_offroad_vehicles" => out.push(Arc::new(RemoveOffroadVehicles)),
            other => {
                errors.push(format!(
                    "{field}.name: unknown postprocessor `{other}` (expected one of {})",
                    trafficgraph::pipeline::BUILTIN_POSTPROCESSORS.join(", ")
                ));
                continue;
            }
        }
        p.finish(errors);
    }
    out
}
