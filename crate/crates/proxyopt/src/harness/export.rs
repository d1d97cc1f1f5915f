//! Result persistence: per-seed trial CSV, wide summary CSV, and the
//! JSON run manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fmt_f64;

use super::{SummaryRow, TrialRecord};

/// `function,dim,landscape,optimizer,seed,distance,best_value,evaluations`,
/// full round-trip precision, ordered as produced by the grid.
pub fn write_trials_csv(path: &Path, records: &[TrialRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(format!("creating {path:?}"), e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io("writing trials CSV", e);
    writeln!(w, "function,dim,landscape,optimizer,seed,distance,best_value,evaluations").map_err(io)?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.function,
            r.dim,
            r.landscape,
            r.optimizer,
            r.seed_index,
            fmt_f64(r.distance),
            fmt_f64(r.result.best_value),
            r.result.evaluations
        )
        .map_err(io)?;
    }
    Ok(())
}

/// Wide summary: one row per landscape, mean/std columns per
/// (function, optimizer) pair.
pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(format!("creating {path:?}"), e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io("writing summary CSV", e);

    // Preserve first-seen order of landscapes and (function, optimizer) pairs.
    let mut landscapes = Vec::new();
    let mut columns = Vec::new();
    for r in rows {
        if !landscapes.contains(&r.landscape) {
            landscapes.push(r.landscape);
        }
        let col = (r.function, r.optimizer);
        if !columns.contains(&col) {
            columns.push(col);
        }
    }

    let mut header = vec!["landscape".to_string()];
    for &(f, o) in &columns {
        header.push(format!("{f}_{o}_mean"));
        header.push(format!("{f}_{o}_std"));
    }
    writeln!(w, "{}", header.join(",")).map_err(io)?;

    for &l in &landscapes {
        let mut fields = vec![l.to_string()];
        for &(f, o) in &columns {
            match rows
                .iter()
                .find(|r| r.landscape == l && r.function == f && r.optimizer == o)
            {
                Some(r) if r.error.is_none() => {
                    fields.push(fmt_f64(r.mean_distance));
                    fields.push(fmt_f64(r.std_distance));
                }
                Some(_) => {
                    fields.push("error".to_string());
                    fields.push("error".to_string());
                }
                None => {
                    fields.push(String::new());
                    fields.push(String::new());
                }
            }
        }
        writeln!(w, "{}", fields.join(",")).map_err(io)?;
    }
    Ok(())
}

/// Everything needed to reproduce a run: the resolved configuration, the
/// master seed, and where the outputs went.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub master_seed: u64,
    pub config: Value,
    pub outputs: Vec<String>,
    pub created_at: String,
}

impl RunManifest {
    pub fn new(command: &str, master_seed: u64, config: Value, outputs: Vec<String>) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed,
            config,
            outputs,
            created_at: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
        }
    }
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(format!("creating {path:?}"), e))?;
    serde_json::to_writer_pretty(BufWriter::new(file), manifest)
        .map_err(|e| Error::Config(format!("serializing manifest: {e}")))?;
    Ok(())
}
