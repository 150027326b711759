//! Subcommand bodies. Each returns `Ok(false)` when it reported problems.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, Result};
use serde::Serialize;
use serde_json::json;
use trafficgraph::dataset::{
    create_dataset, open_dataset, CreateOptions, Dataset, ScenarioOutcome, ScenarioProgress, SAMPLES_DIR,
};
use trafficgraph::graph::{all_store_keys, deserialize, ChannelSchema, FeatureMatrix, GraphSchema, StoreKey, TrafficGraph};

use crate::config::RunConfiguration;

/// `println!` that hands write errors (such as a closed pipe) back to the caller.
macro_rules! outln {
    ($($arg:tt)*) => {
        writeln!(std::io::stdout().lock(), $($arg)*)?
    };
}

pub fn extract(
    config: &Path,
    out: Option<PathBuf>,
    workers: Option<usize>,
    overwrite: bool,
    json: bool,
) -> Result<bool> {
    let run = RunConfiguration::load(config)?;
    let out = out.or(run.output.clone()).ok_or_else(|| anyhow!("no output directory: set `output` or pass --out"))?;
    let options = CreateOptions {
        workers: workers.unwrap_or(run.workers),
        overwrite: overwrite || run.overwrite,
        error_policy: run.error_policy,
        config_document: Some(run.document.clone()),
        progress: Some(Arc::new(report_progress)),
    };
    log::info!("extracting into {} with {:?}", out.display(), run);
    let report = create_dataset(&run.chain, &run.collector, &run.extraction, &run.inputs, &out, &options)?;
    let counts = &report.manifest.counts;
    if json {
        let summary = json!({
            "output": out,
            "scenarios": counts.scenarios,
            "accepted": counts.accepted,
            "rejected": counts.rejected,
            "failed": counts.failed,
            "samples": counts.samples,
            "failures": report.failures.iter().map(|(f, e)| json!({"file": f, "error": e})).collect::<Vec<_>>(),
            "wall_time_s": report.elapsed.as_secs_f64(),
            "fingerprint": report.manifest.fingerprint,
        });
        outln!("{}", serde_json::to_string_pretty(&summary)?);
    } else {
        outln!(
            "{} scenarios: {} accepted, {} rejected, {} failed; {} samples written to {} in {:.2?}",
            counts.scenarios,
            counts.accepted,
            counts.rejected,
            counts.failed,
            counts.samples,
            out.display(),
            report.elapsed
        );
    }
    for (file, error) in &report.failures {
        eprintln!("failed: {}: {error}", file.display());
    }
    Ok(report.failures.is_empty())
}

fn report_progress(p: &ScenarioProgress) {
    let name = p.scenario_id.clone().unwrap_or_else(|| p.file.display().to_string());
    let what = match &p.outcome {
        ScenarioOutcome::Accepted { samples } => format!("accepted, {samples} samples"),
        ScenarioOutcome::Rejected => "rejected by filter".to_string(),
        ScenarioOutcome::Failed { error } => format!("failed: {error}"),
    };
    eprintln!("[{}/{}] {name}: {what}", p.done, p.total);
}

/// Statistics of one channel over the finite entries of its columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelStats {
    pub name: String,
    pub width: usize,
    pub finite: usize,
    pub missing: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
}

pub fn channel_stats(schema: &ChannelSchema, x: &FeatureMatrix) -> Vec<ChannelStats> {
    let mut offset = 0;
    schema
        .channels()
        .iter()
        .map(|c| {
            let values: Vec<f64> = (0..x.rows())
                .flat_map(|r| x.row(r)[offset..offset + c.width].iter().map(|v| f64::from(*v)))
                .collect();
            offset += c.width;
            let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
            let (min, max, mean) = if finite.is_empty() {
                (None, None, None)
            } else {
                (
                    Some(finite.iter().copied().fold(f64::INFINITY, f64::min)),
                    Some(finite.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
                    Some(finite.iter().sum::<f64>() / finite.len() as f64),
                )
            };
            ChannelStats {
                name: c.name.clone(),
                width: c.width,
                finite: finite.len(),
                missing: values.len() - finite.len(),
                min,
                max,
                mean,
            }
        })
        .collect()
}

fn store_parts(g: &TrafficGraph, key: StoreKey) -> Option<(usize, &ChannelSchema, &FeatureMatrix)> {
    match key {
        StoreKey::Node(t) => {
            let s = g.nodes(t);
            Some((s.len(), &s.schema, &s.x))
        }
        StoreKey::Edge(r) => g.edge_store(r).map(|s| (s.len(), &s.schema, &s.x)),
    }
}

fn schema_json(schema: &GraphSchema) -> serde_json::Value {
    all_store_keys()
        .map(|k| {
            let channels: Vec<_> =
                schema.get(k).channels().iter().map(|c| json!({"name": c.name, "width": c.width, "unit": c.unit})).collect();
            (k.key().to_string(), json!(channels))
        })
        .collect::<serde_json::Map<_, _>>()
        .into()
}

fn print_schema(schema: &GraphSchema) -> Result<()> {
    outln!("schema:");
    for k in all_store_keys() {
        let s = schema.get(k);
        let channels: Vec<String> = s.channels().iter().map(|c| format!("{}[{}]", c.name, c.width)).collect();
        outln!("  {:<4} width {:>3}: {}", k.key(), s.width(), channels.join(" "));
    }
    Ok(())
}

pub fn inspect(root: &Path, index: Option<usize>, stats: bool, json: bool) -> Result<bool> {
    let ds = open_dataset(root)?;
    match index {
        None => inspect_dataset(&ds, json)?,
        Some(i) => inspect_sample(&ds, i, stats, json)?,
    }
    Ok(true)
}

fn inspect_dataset(ds: &Dataset, json: bool) -> Result<()> {
    let m = ds.manifest();
    if json {
        let summary = json!({
            "samples": ds.len(),
            "counts": m.counts,
            "temporal": m.temporal,
            "fingerprint": m.fingerprint,
            "schema": schema_json(&m.schema),
        });
        outln!("{}", serde_json::to_string_pretty(&summary)?);
        return Ok(());
    }
    outln!("{}: {} samples", ds.root().display(), ds.len());
    let c = &m.counts;
    outln!(
        "scenarios: {} ({} accepted, {} rejected, {} failed); temporal: {}",
        c.scenarios, c.accepted, c.rejected, c.failed, m.temporal
    );
    outln!("fingerprint: {}", m.fingerprint);
    print_schema(&m.schema)?;
    Ok(())
}

fn inspect_sample(ds: &Dataset, index: usize, stats: bool, json: bool) -> Result<()> {
    let entry = ds.entry(index)?.clone();
    let g = ds.get(index)?;
    let stores: Vec<(StoreKey, usize, Option<Vec<ChannelStats>>)> = all_store_keys()
        .filter_map(|k| {
            let (n, schema, x) = store_parts(&g, k)?;
            Some((k, n, stats.then(|| channel_stats(schema, x))))
        })
        .collect();
    if json {
        let summary = json!({
            "index": index,
            "file": entry.file,
            "scenario_id": g.scenario_id,
            "timestep": g.timestep,
            "window": g.window.map(|w| [w.oldest, w.newest]),
            "counts": stores.iter().map(|(k, n, _)| (k.key().to_string(), json!(n))).collect::<serde_json::Map<_, _>>(),
            "globals": g.globals.iter().map(|f| (f.name.clone(), json!(f.values))).collect::<serde_json::Map<_, _>>(),
            "schema": schema_json(&g.schema()),
            "stats": stats.then(|| stores.iter().map(|(k, _, s)| (k.key().to_string(), json!(s))).collect::<serde_json::Map<_, _>>()),
        });
        outln!("{}", serde_json::to_string_pretty(&summary)?);
        return Ok(());
    }
    outln!("sample {index} of {}: {}", ds.len(), entry.file);
    outln!("scenario {} at timestep {}", g.scenario_id, g.timestep);
    if let Some(w) = g.window {
        outln!("window: timesteps {}..={}", w.oldest, w.newest);
    }
    for (k, n, _) in &stores {
        outln!("  {:<4} {n}", k.key());
    }
    for f in &g.globals {
        outln!("  global {} = {:?}", f.name, f.values);
    }
    print_schema(&g.schema())?;
    if stats {
        outln!("statistics (NaN entries excluded):");
        for (k, _, s) in &stores {
            for c in s.iter().flatten() {
                match (c.min, c.max, c.mean) {
                    (Some(lo), Some(hi), Some(mean)) => outln!(
                        "  {:<4} {:<24} min {lo:>12.4} max {hi:>12.4} mean {mean:>12.4} ({} missing)",
                        k.key(),
                        c.name,
                        c.missing
                    ),
                    _ => outln!("  {:<4} {:<24} no finite values", k.key(), c.name),
                }
            }
        }
    }
    Ok(())
}

pub fn validate(root: &Path) -> Result<bool> {
    let ds = match open_dataset(root) {
        Ok(ds) => ds,
        Err(e) => {
            outln!("dataset: {e}");
            outln!("1 violation");
            return Ok(false);
        }
    };
    let mut violations: Vec<String> = Vec::new();
    let expected = ds.manifest().schema.clone();
    let mut indexed = BTreeSet::new();
    for i in 0..ds.len() {
        let entry = ds.entry(i)?;
        indexed.insert(entry.file.clone());
        let at = |m: String| format!("{}: {m}", entry.file);
        let bytes = match ds.read_bytes(i) {
            Ok(b) => b,
            Err(e) => {
                violations.push(at(e.to_string()));
                continue;
            }
        };
        let g = match deserialize(&bytes) {
            Ok(g) => g,
            Err(e) => {
                violations.push(at(format!("cannot decode: {e}")));
                continue;
            }
        };
        if g.scenario_id != entry.scenario_id || g.timestep != entry.timestep {
            violations.push(at(format!(
                "holds {} at {} but the manifest says {} at {}",
                g.scenario_id, g.timestep, entry.scenario_id, entry.timestep
            )));
        }
        if g.schema() != expected {
            violations.push(at("schema differs from the manifest".into()));
        }
        violations.extend(g.scan().into_iter().map(|v| at(v.to_string())));
    }
    let dir = ds.root().join(SAMPLES_DIR);
    if let Ok(read) = fs::read_dir(&dir) {
        let mut stray: Vec<String> = read
            .filter_map(|e| e.ok())
            .map(|e| format!("{SAMPLES_DIR}/{}", e.file_name().to_string_lossy()))
            .filter(|f| !indexed.contains(f))
            .collect();
        stray.sort();
        violations.extend(stray.into_iter().map(|f| format!("{f}: not listed in the manifest")));
    }
    for v in &violations {
        outln!("{v}");
    }
    outln!(
        "{} samples checked, {} violation{}",
        ds.len(),
        violations.len(),
        if violations.len() == 1 { "" } else { "s" }
    );
    Ok(violations.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use trafficgraph::graph::Channel;

    #[test]
    fn stats_skip_nan_and_span_channel_columns() {
        let schema = ChannelSchema::new(vec![Channel::new("a", 1, ""), Channel::new("b", 2, "m")]).unwrap();
        let x = FeatureMatrix::from_values(3, vec![1.0, f32::NAN, 4.0, 3.0, 2.0, f32::NAN]).unwrap();
        let s = channel_stats(&schema, &x);
        assert_eq!((s[0].finite, s[0].missing, s[0].min, s[0].max, s[0].mean), (2, 0, Some(1.0), Some(3.0), Some(2.0)));
        assert_eq!((s[1].finite, s[1].missing, s[1].min, s[1].max, s[1].mean), (2, 2, Some(2.0), Some(4.0), Some(3.0)));
    }

    #[test]
    fn all_nan_channel_has_no_statistics() {
        let schema = ChannelSchema::new(vec![Channel::new("a", 1, "")]).unwrap();
        let x = FeatureMatrix::from_values(1, vec![f32::NAN]).unwrap();
        let s = channel_stats(&schema, &x);
        assert_eq!((s[0].min, s[0].max, s[0].mean, s[0].missing), (None, None, None, 1));
    }
}
