//! Run reports: one JSON document per run plus long-format CSV rows.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::metrics::Summary;
use super::runner::MethodRun;
use crate::error::{Error, Result};

/// Report file name for a run: `<sequence>_<method>_seed<seed>.json`.
pub fn report_name(run: &MethodRun) -> String {
    format!("{}_{}_seed{}.json", run.sequence.name(), run.method, run.sequence.seed)
}

pub fn to_json(run: &MethodRun) -> Result<String> {
    serde_json::to_string_pretty(run).map_err(|e| Error::Format(e.to_string()))
}

pub fn from_json(text: &str) -> Result<MethodRun> {
    let run: MethodRun = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    if Summary::of(&run.result)? != run.summary {
        return Err(Error::Format("stored summary disagrees with the result matrix".into()));
    }
    Ok(run)
}

pub fn write_report(dir: &Path, run: &MethodRun) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(report_name(run));
    fs::write(&path, to_json(run)?).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Reads every `*.json` report in `dir`, sorted by file name.
pub fn read_reports(dir: &Path) -> Result<Vec<MethodRun>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json") && p.is_file())
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            from_json(&text).map_err(|e| Error::Format(format!("{}: {e}", p.display())))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongRow {
    pub method: String,
    pub case: String,
    pub seed: u64,
    pub metric: String,
    /// Step size for `f_k`, task number for per-task metrics, empty otherwise.
    pub k: Option<usize>,
    pub value: f64,
}

pub fn long_rows(run: &MethodRun) -> Vec<LongRow> {
    let row = |metric: &str, k: Option<usize>, value: f64| LongRow {
        method: run.method.to_string(),
        case: run.sequence.name(),
        seed: run.sequence.seed,
        metric: metric.into(),
        k,
        value,
    };
    let mut out = vec![row("ave_mape", None, run.summary.ave_mape)];
    if let Some(f) = run.summary.forgetting {
        out.push(row("forgetting", None, f));
    }
    out.extend(run.summary.f_k.iter().map(|&(k, v)| row("f_k", Some(k), v)));
    if let Some(v) = run.tail_summary.ave_mape {
        out.push(row("tail_ave_mape", None, v));
    }
    if let Some(v) = run.tail_summary.forgetting {
        out.push(row("tail_forgetting", None, v));
    }
    out.push(row("tail_coverage", None, run.tail_summary.coverage));
    out.extend(
        run.storage_bytes
            .iter()
            .enumerate()
            .map(|(i, &b)| row("storage_bytes", Some(i + 1), b as f64)),
    );
    out
}

pub fn write_long_csv(path: &Path, runs: &[MethodRun]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    for run in runs {
        for r in long_rows(run) {
            w.serialize(&r).map_err(|e| Error::Format(e.to_string()))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}
