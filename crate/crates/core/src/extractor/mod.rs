//! Single-timestep and temporal-window graph extraction over a scenario
//! replay.

mod simulation;
mod single;
mod temporal;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde_json::json;

use crate::builders::{L2LAdjacencyType, V2LAssignmentStrategy};
use crate::drawers::{V2VDrawerConfig, VTVDrawerConfig};
use crate::error::{Error, Result};
use crate::features::{
    builtin_extractor, builtin_temporal_extractor, default_schema, register_channels, FeatureExtractor,
    TemporalFeatureExtractor, DEFAULT_N_PAD,
};
use crate::graph::{ChannelSchema, GraphSchema, Relation, StoreKey};
use crate::pipeline::Postprocessor;

pub use simulation::Simulation;
pub use single::TrafficExtractor;
pub use temporal::TemporalExtractor;

type MakeExtractor = dyn Fn() -> Box<dyn FeatureExtractor> + Send + Sync;
type MakeTemporalExtractor = dyn Fn() -> Box<dyn TemporalFeatureExtractor> + Send + Sync;

/// Creates a fresh extractor instance per scenario, so stateful extractors
/// never share state across workers.
#[derive(Clone)]
pub struct ExtractorFactory {
    name: String,
    make: Arc<MakeExtractor>,
}

impl ExtractorFactory {
    pub fn new(name: impl Into<String>, make: impl Fn() -> Box<dyn FeatureExtractor> + Send + Sync + 'static) -> Self {
        Self { name: name.into(), make: Arc::new(make) }
    }

    pub fn builtin(name: &str) -> Option<Self> {
        builtin_extractor(name)?;
        let owned = name.to_string();
        Some(Self::new(name, move || builtin_extractor(&owned).expect("checked above")))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn make(&self) -> Box<dyn FeatureExtractor> {
        (self.make)()
    }
}

impl fmt::Debug for ExtractorFactory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExtractorFactory({})", self.name)
    }
}

#[derive(Clone)]
pub struct TemporalExtractorFactory {
    name: String,
    make: Arc<MakeTemporalExtractor>,
}

impl TemporalExtractorFactory {
    pub fn new(
        name: impl Into<String>,
        make: impl Fn() -> Box<dyn TemporalFeatureExtractor> + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), make: Arc::new(make) }
    }

    pub fn builtin(name: &str) -> Option<Self> {
        builtin_temporal_extractor(name)?;
        let owned = name.to_string();
        Some(Self::new(name, move || builtin_temporal_extractor(&owned).expect("checked above")))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn make(&self) -> Box<dyn TemporalFeatureExtractor> {
        (self.make)()
    }
}

impl fmt::Debug for TemporalExtractorFactory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TemporalExtractorFactory({})", self.name)
    }
}

/// Everything that shapes an extracted graph.
#[derive(Clone)]
pub struct ExtractionConfig {
    pub v2v: V2VDrawerConfig,
    pub vtv: VTVDrawerConfig,
    pub l2l_types: BTreeSet<L2LAdjacencyType>,
    pub v2l_strategy: V2LAssignmentStrategy,
    /// Vertex slots per lanelet bound.
    pub n_pad: usize,
    pub extractors: Vec<ExtractorFactory>,
    pub temporal_extractors: Vec<TemporalExtractorFactory>,
    pub postprocessors: Vec<Arc<dyn Postprocessor>>,
    pub temporal_postprocessors: Vec<Arc<dyn Postprocessor>>,
    /// Number of single-step graphs kept for temporal windows.
    pub cache_size: usize,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            v2v: V2VDrawerConfig::default(),
            vtv: VTVDrawerConfig::default(),
            l2l_types: L2LAdjacencyType::all(),
            v2l_strategy: V2LAssignmentStrategy::Center,
            n_pad: DEFAULT_N_PAD,
            extractors: Vec::new(),
            temporal_extractors: Vec::new(),
            postprocessors: Vec::new(),
            temporal_postprocessors: Vec::new(),
            cache_size: 5,
        }
    }
}

impl fmt::Debug for ExtractionConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExtractionConfig({})", self.descriptor())
    }
}

impl ExtractionConfig {
    pub fn validate(&self, temporal: bool) -> Result<()> {
        self.v2v.validate()?;
        if self.n_pad < 2 {
            return Err(Error::Argument(format!("n_pad must be at least 2, got {}", self.n_pad)));
        }
        if temporal {
            self.vtv.validate()?;
            if self.cache_size < 1 {
                return Err(Error::Argument("cache size must be at least 1".into()));
            }
            if self.vtv.max_horizon > self.cache_size as i64 - 1 {
                return Err(Error::Argument(format!(
                    "VTV horizon {} exceeds cache size {} minus one",
                    self.vtv.max_horizon, self.cache_size
                )));
            }
        }
        Ok(())
    }

    /// Schema of single-step graphs: base channels plus registered custom
    /// channels in declaration order.
    pub fn schema(&self) -> Result<GraphSchema> {
        let mut schema = default_schema(self.n_pad);
        schema.vtv = ChannelSchema::default();
        for f in &self.extractors {
            let e = f.make();
            if matches!(e.store(), StoreKey::Edge(Relation::VTV)) {
                return Err(Error::Schema(format!("extractor `{}` targets vtv; register it as temporal", e.name())));
            }
            register_channels(&mut schema, e.store(), e.channels())
                .map_err(|err| Error::component("feature extractor", e.name(), err))?;
        }
        Ok(schema)
    }

    /// Schema of temporal graphs.
    pub fn temporal_schema(&self) -> Result<GraphSchema> {
        let mut schema = self.schema()?;
        schema.vtv = crate::features::vtv_schema();
        for f in &self.temporal_extractors {
            let e = f.make();
            register_channels(&mut schema, e.store(), e.channels())
                .map_err(|err| Error::component("temporal feature extractor", e.name(), err))?;
        }
        Ok(schema)
    }

    /// Stable JSON description, used for dataset fingerprints.
    pub fn descriptor(&self) -> serde_json::Value {
        json!({
            "v2v": self.v2v,
            "vtv": self.vtv,
            "l2l_types": self.l2l_types,
            "v2l_strategy": self.v2l_strategy,
            "n_pad": self.n_pad,
            "extractors": self.extractors.iter().map(|f| f.name()).collect::<Vec<_>>(),
            "temporal_extractors": self.temporal_extractors.iter().map(|f| f.name()).collect::<Vec<_>>(),
            "postprocessors": self.postprocessors.iter().map(|p| p.describe()).collect::<Vec<_>>(),
            "temporal_postprocessors": self.temporal_postprocessors.iter().map(|p| p.describe()).collect::<Vec<_>>(),
            "cache_size": self.cache_size,
        })
    }
}
