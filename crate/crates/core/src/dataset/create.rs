use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use super::{
    collect_scenario, sample_schema, CollectorConfig, Manifest, ManifestCounts, SampleEntry, DATASET_VERSION,
    MANIFEST_FILE, SAMPLES_DIR,
};
use crate::error::{Error, Result};
use crate::extractor::ExtractionConfig;
use crate::graph::{serialize, FORMAT_VERSION};
use crate::pipeline::TransformChain;
use crate::scenario::{parse_scenario_bytes, Scenario};

/// What happens when one scenario fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorPolicy {
    /// Fail the whole run; no manifest is written.
    #[default]
    Abort,
    /// Leave the scenario out and continue.
    Skip,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScenarioOutcome {
    Accepted { samples: usize },
    Rejected,
    Failed { error: String },
}

/// Reported once per scenario file, from the worker that handled it.
#[derive(Debug, Clone)]
pub struct ScenarioProgress {
    pub file: PathBuf,
    pub scenario_id: Option<String>,
    pub outcome: ScenarioOutcome,
    pub done: usize,
    pub total: usize,
}

type ProgressFn = dyn Fn(&ScenarioProgress) + Send + Sync;

#[derive(Clone, Default)]
pub struct CreateOptions {
    /// Worker threads; 0 picks one per core.
    pub workers: usize,
    pub overwrite: bool,
    pub error_policy: ErrorPolicy,
    /// The run configuration as given by the user; hashed into the
    /// fingerprint alongside the effective configuration.
    pub config_document: Option<serde_json::Value>,
    pub progress: Option<Arc<ProgressFn>>,
}

impl fmt::Debug for CreateOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CreateOptions")
            .field("workers", &self.workers)
            .field("overwrite", &self.overwrite)
            .field("error_policy", &self.error_policy)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub struct CreateReport {
    pub manifest: Manifest,
    /// Scenario files skipped under [`ErrorPolicy::Skip`], with the reason.
    pub failures: Vec<(PathBuf, String)>,
    pub elapsed: Duration,
}

/// sha256 over everything that influences sample content.
pub fn fingerprint(
    chain: &TransformChain,
    collector: &CollectorConfig,
    config: &ExtractionConfig,
    document: Option<&serde_json::Value>,
) -> String {
    let descriptor = json!({
        "sample_format_version": FORMAT_VERSION,
        "chain": chain.elements().iter().map(|e| e.name()).collect::<Vec<_>>(),
        "collector": collector,
        "extraction": config.descriptor(),
        "document": document,
    });
    hex::encode(Sha256::digest(descriptor.to_string().as_bytes()))
}

fn scenario_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        let meta = fs::metadata(input).map_err(|e| Error::io(input, e))?;
        if meta.is_dir() {
            for entry in fs::read_dir(input).map_err(|e| Error::io(input, e))? {
                let path = entry.map_err(|e| Error::io(input, e))?.path();
                if path.is_file() && path.extension().is_some_and(|x| x.eq_ignore_ascii_case("xml")) {
                    files.push(path);
                }
            }
        } else {
            files.push(input.clone());
        }
    }
    files.sort();
    files.dedup();
    Ok(files)
}

/// File-name-safe form of a scenario id.
fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '.' | '_') { c } else { '_' })
        .collect()
}

fn prepare_output(out: &Path, overwrite: bool) -> Result<()> {
    if out.exists() {
        let mut entries = fs::read_dir(out).map_err(|e| Error::io(out, e))?;
        if entries.next().is_some() {
            if !overwrite {
                return Err(Error::Dataset(format!(
                    "output directory {} is not empty; pass the overwrite flag to replace it",
                    out.display()
                )));
            }
            // drop the commit point first so a crash leaves no stale manifest
            let manifest = out.join(MANIFEST_FILE);
            if manifest.exists() {
                fs::remove_file(&manifest).map_err(|e| Error::io(&manifest, e))?;
            }
            let samples = out.join(SAMPLES_DIR);
            if samples.exists() {
                fs::remove_dir_all(&samples).map_err(|e| Error::io(&samples, e))?;
            }
        }
    }
    let samples = out.join(SAMPLES_DIR);
    fs::create_dir_all(&samples).map_err(|e| Error::io(&samples, e))
}

fn load(file: &Path) -> Result<Scenario> {
    let bytes = fs::read(file).map_err(|e| Error::io(file, e))?;
    let mut scenario = parse_scenario_bytes(&bytes)?;
    if scenario.id.is_empty() {
        scenario.id = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    }
    Ok(scenario)
}

struct Job {
    file: PathBuf,
    scenario: Result<Scenario>,
}

struct Finished {
    file: PathBuf,
    result: Result<Option<Vec<SampleEntry>>>,
}

/// Builds a dataset from scenario files (directories are scanned for
/// `*.xml`). Scenarios run through `chain`, are collected, and each sample is
/// written to its own file by the worker that produced it. The manifest is
/// written last, atomically.
pub fn create_dataset(
    chain: &TransformChain,
    collector: &CollectorConfig,
    config: &ExtractionConfig,
    inputs: &[PathBuf],
    out: &Path,
    options: &CreateOptions,
) -> Result<CreateReport> {
    let started = Instant::now();
    collector.validate()?;
    config.validate(collector.temporal)?;
    let schema = sample_schema(collector, config)?;
    let files = scenario_files(inputs)?;
    prepare_output(out, options.overwrite)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .map_err(|e| Error::Argument(format!("cannot start worker pool: {e}")))?;

    let mut jobs: Vec<Job> =
        pool.install(|| files.par_iter().map(|f| Job { file: f.clone(), scenario: load(f) }).collect());

    // scenario ids name the sample files, so they must be unique
    let mut owners: BTreeMap<String, PathBuf> = BTreeMap::new();
    for job in &mut jobs {
        let Ok(s) = &job.scenario else { continue };
        let stem = file_stem(&s.id);
        if let Some(other) = owners.get(&stem) {
            job.scenario = Err(Error::Dataset(format!(
                "scenario id `{}` also used by {}",
                s.id,
                other.display()
            )));
        } else {
            owners.insert(stem, job.file.clone());
        }
    }

    let total = jobs.len();
    let done = AtomicUsize::new(0);
    let samples_dir = out.join(SAMPLES_DIR);
    let finished: Vec<Finished> = pool.install(|| {
        jobs.into_par_iter()
            .map(|job| {
                let scenario_id = job.scenario.as_ref().ok().map(|s| s.id.clone());
                let result = job.scenario.and_then(|s| {
                    let id = s.id.clone();
                    run_scenario(chain, collector, config, s, &samples_dir).map_err(|e| Error::in_scenario(id, e))
                });
                let outcome = match &result {
                    Ok(Some(entries)) => ScenarioOutcome::Accepted { samples: entries.len() },
                    Ok(None) => ScenarioOutcome::Rejected,
                    Err(e) => ScenarioOutcome::Failed { error: e.to_string() },
                };
                let n = done.fetch_add(1, Ordering::SeqCst) + 1;
                if let Some(progress) = &options.progress {
                    progress(&ScenarioProgress { file: job.file.clone(), scenario_id, outcome, done: n, total });
                }
                Finished { file: job.file, result }
            })
            .collect()
    });

    let mut counts = ManifestCounts { scenarios: total, ..ManifestCounts::default() };
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for f in finished {
        match f.result {
            Ok(Some(e)) => {
                counts.accepted += 1;
                entries.extend(e);
            }
            Ok(None) => counts.rejected += 1,
            Err(e) => {
                if options.error_policy == ErrorPolicy::Abort {
                    return Err(e);
                }
                log::warn!("skipping {}: {e}", f.file.display());
                counts.failed += 1;
                failures.push((f.file, e.to_string()));
            }
        }
    }
    entries.sort_by(|a, b| (&a.scenario_id, a.timestep).cmp(&(&b.scenario_id, b.timestep)));
    counts.samples = entries.len();

    let manifest = Manifest {
        version: DATASET_VERSION,
        sample_format_version: FORMAT_VERSION,
        created_at: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        fingerprint: fingerprint(chain, collector, config, options.config_document.as_ref()),
        temporal: collector.temporal,
        schema,
        counts,
        samples: entries,
    };
    let tmp = out.join(format!("{MANIFEST_FILE}.tmp"));
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    let path = out.join(MANIFEST_FILE);
    fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
    Ok(CreateReport { manifest, failures, elapsed: started.elapsed() })
}

fn run_scenario(
    chain: &TransformChain,
    collector: &CollectorConfig,
    config: &ExtractionConfig,
    scenario: Scenario,
    samples_dir: &Path,
) -> Result<Option<Vec<SampleEntry>>> {
    let Some(scenario) = chain.apply(scenario)? else {
        return Ok(None);
    };
    let id = scenario.id.clone();
    let graphs = collect_scenario(collector, config, scenario)?;
    let mut entries = Vec::with_capacity(graphs.len());
    for g in &graphs {
        let bytes = serialize(g);
        let name = format!("{}_{}.crg", file_stem(&id), g.timestep);
        let path = samples_dir.join(&name);
        fs::write(&path, &bytes).map_err(|e| Error::io(&path, e))?;
        entries.push(SampleEntry {
            scenario_id: id.clone(),
            timestep: g.timestep,
            file: format!("{SAMPLES_DIR}/{name}"),
            bytes: bytes.len() as u64,
            crc32: crc32fast::hash(&bytes),
        });
    }
    Ok(Some(entries))
}
