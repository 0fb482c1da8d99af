use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use log::{info, warn};
use scenetree::eval::{evaluate_corpus, EvalConfig, EvalMode};
use scenetree::flat::{flat_from_value, to_hierarchy};
use scenetree::serialization::json;
use scenetree::serialization::{open_jsonl, parse_serialized, ParseMode};
use scenetree::{JsonlError, SceneRecord};
use serde::Deserialize;

use crate::io::{emit_report, read_all};
use crate::PredFormat;

pub struct Args {
    pub gt: PathBuf,
    pub pred: PathBuf,
    pub mode: EvalMode,
    pub thresholds: Vec<f64>,
    pub pred_format: PredFormat,
    pub strict: bool,
    pub out: PathBuf,
}

/// One line of raw model output.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    image_id: String,
    output: String,
}

pub fn run(args: &Args) -> Result<bool> {
    let gts: Vec<SceneRecord> = read_all(&args.gt)?;
    let sizes: HashMap<&str, (u32, u32)> = gts
        .iter()
        .map(|g| (g.image_id.as_str(), (g.width, g.height)))
        .collect();
    let preds = match args.pred_format {
        PredFormat::Dataset => dataset_preds(args)?,
        PredFormat::Serialized => serialized_preds(args, &sizes)?,
        PredFormat::Flat => flat_preds(args, &sizes)?,
    };

    let cfg = EvalConfig {
        thresholds: args.thresholds.clone(),
        mode: args.mode,
    };
    let out = evaluate_corpus(&preds, &gts, &cfg)?;
    for w in &out.warnings {
        warn!("{w}");
    }
    emit_report(&args.out, &out.report, &out.report.to_table())?;
    Ok(true)
}

/// Strict runs stop on a bad line; tolerant runs skip it.
fn bad_line(args: &Args, line: usize, message: &str) -> Result<()> {
    if args.strict {
        bail!("{}: line {line}: {message}", args.pred.display());
    }
    warn!("{}: line {line}: {message}; skipped", args.pred.display());
    Ok(())
}

fn dataset_preds(args: &Args) -> Result<Vec<SceneRecord>> {
    let reader = open_jsonl::<SceneRecord>(&args.pred)
        .with_context(|| format!("reading {}", args.pred.display()))?;
    let mut preds = Vec::new();
    for item in reader {
        match item {
            Ok((_, r)) => preds.push(r),
            Err(JsonlError::Line { line, message }) => bad_line(args, line, &message)?,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(preds)
}

fn serialized_preds(args: &Args, sizes: &HashMap<&str, (u32, u32)>) -> Result<Vec<SceneRecord>> {
    let reader = open_jsonl::<RawOutput>(&args.pred)
        .with_context(|| format!("reading {}", args.pred.display()))?;
    let mode = if args.strict {
        ParseMode::Strict
    } else {
        ParseMode::Tolerant
    };
    let mut preds = Vec::new();
    for item in reader {
        let (line, raw) = match item {
            Ok(x) => x,
            Err(JsonlError::Line { line, message }) => {
                bad_line(args, line, &message)?;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let Some(&(w, h)) = sizes.get(raw.image_id.as_str()) else {
            // No size to decode against; the join reports it as an orphan.
            preds.push(SceneRecord::new(raw.image_id, 0, 0));
            continue;
        };
        let outcome = match parse_serialized(&raw.output, w, h, mode) {
            Ok(o) => o,
            Err(e) => bail!(
                "{}: line {line} ({:?}): {e}",
                args.pred.display(),
                raw.image_id
            ),
        };
        for d in &outcome.diagnostics.issues {
            info!(
                "line {line} ({:?}): offset {} [{}] {}",
                raw.image_id, d.offset, d.code, d.message
            );
        }
        let mut rec = outcome.record.unwrap_or_else(|| {
            warn!(
                "{}: line {line} ({:?}): output could not be recovered; scored as empty",
                args.pred.display(),
                raw.image_id
            );
            SceneRecord::new("", w, h)
        });
        rec.image_id = raw.image_id;
        preds.push(rec);
    }
    Ok(preds)
}

fn flat_preds(args: &Args, sizes: &HashMap<&str, (u32, u32)>) -> Result<Vec<SceneRecord>> {
    let text = fs::read_to_string(&args.pred)
        .with_context(|| format!("reading {}", args.pred.display()))?;
    let mut preds = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let parsed = json::parse_strict(raw).and_then(|v| {
            let size = v
                .get("image_id")
                .and_then(|id| id.as_str())
                .and_then(|id| sizes.get(id))
                .copied();
            flat_from_value(&v, size)
        });
        match parsed {
            Ok(flat) => {
                let (rec, report) = to_hierarchy(&flat);
                if !report.dropped_duplicates.is_empty() {
                    info!(
                        "line {line}: {} duplicate triplets dropped",
                        report.dropped_duplicates.len()
                    );
                }
                preds.push(rec);
            }
            Err(e) => bad_line(args, line, &e.to_string())?,
        }
    }
    Ok(preds)
}
