//! Per-scenario sample collection and the on-disk dataset:
//! `<out>/samples/<scenario>_<timestep>.crg` plus `<out>/manifest.json`.

mod create;
mod read;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extractor::{ExtractionConfig, Simulation, TemporalExtractor, TrafficExtractor};
use crate::graph::{GraphSchema, TrafficGraph};
use crate::scenario::Scenario;

pub use create::{create_dataset, fingerprint, CreateOptions, CreateReport, ErrorPolicy, ScenarioOutcome, ScenarioProgress};
pub use read::{open_dataset, Dataset};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SAMPLES_DIR: &str = "samples";
pub const DATASET_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollectorConfig {
    /// Timesteps per scenario, counted from its first timestep; `None`
    /// covers the full lifetime.
    pub timesteps: Option<usize>,
    /// Keep every `stride`-th timestep.
    pub stride: usize,
    pub temporal: bool,
    /// Temporal only: drop samples whose window is not yet full.
    pub skip_warmup: bool,
}

impl Default for CollectorConfig {
    fn default() -> Self {
        Self { timesteps: None, stride: 1, temporal: false, skip_warmup: false }
    }
}

impl CollectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.stride == 0 {
            return Err(Error::Argument("stride must be at least 1".into()));
        }
        if self.timesteps == Some(0) {
            return Err(Error::Argument("timesteps must be at least 1".into()));
        }
        Ok(())
    }
}

/// Schema of the samples a collector/extraction pair produces.
pub fn sample_schema(collector: &CollectorConfig, config: &ExtractionConfig) -> Result<GraphSchema> {
    if collector.temporal {
        config.temporal_schema()
    } else {
        config.schema()
    }
}

/// Chronological samples of one scenario.
///
/// Samples are taken at `first + k * stride` within the first `timesteps`
/// steps of the lifetime. Temporal collection still extracts every step so
/// windows stay contiguous.
pub fn collect_scenario(
    collector: &CollectorConfig,
    config: &ExtractionConfig,
    scenario: Scenario,
) -> Result<Vec<TrafficGraph>> {
    collector.validate()?;
    let sim = Arc::new(Simulation::new(scenario)?);
    let (first, last) = sim.lifetime();
    let end = match collector.timesteps {
        Some(n) => last.min(first + n as i64 - 1),
        None => last,
    };
    let sampled = |t: i64| (t - first) % collector.stride as i64 == 0;
    let mut out = Vec::new();
    if collector.temporal {
        let mut extractor = TemporalExtractor::new(config.clone(), sim)?;
        for t in first..=end {
            let g = extractor.extract(t)?;
            if sampled(t) && (!collector.skip_warmup || extractor.is_warm()) {
                out.push(g);
            }
        }
    } else {
        let mut extractor = TrafficExtractor::new(config.clone(), sim)?;
        for t in (first..=end).step_by(collector.stride) {
            out.push(extractor.extract(t)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleEntry {
    pub scenario_id: String,
    pub timestep: i64,
    /// Path relative to the dataset root.
    pub file: String,
    pub bytes: u64,
    pub crc32: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestCounts {
    pub scenarios: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub failed: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    pub sample_format_version: u32,
    /// Seconds since the Unix epoch. The only field that differs between
    /// identical runs.
    pub created_at: u64,
    /// sha256 over the run configuration.
    pub fingerprint: String,
    pub temporal: bool,
    pub schema: GraphSchema,
    pub counts: ManifestCounts,
    pub samples: Vec<SampleEntry>,
}

impl Manifest {
    pub fn validate(&self) -> Result<()> {
        if self.version != DATASET_VERSION {
            return Err(Error::Dataset(format!("unsupported manifest version {}", self.version)));
        }
        if self.counts.samples != self.samples.len() {
            return Err(Error::Dataset(format!(
                "manifest counts {} samples but indexes {}",
                self.counts.samples,
                self.samples.len()
            )));
        }
        if self.counts.accepted + self.counts.rejected + self.counts.failed != self.counts.scenarios {
            return Err(Error::Dataset("scenario counts do not add up".into()));
        }
        Ok(())
    }
}
