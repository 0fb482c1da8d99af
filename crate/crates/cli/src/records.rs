use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use anyhow::{bail, Context, Result};
use log::warn;
use rayon::prelude::*;
use scenetree::curriculum::pseudo_complete;
use scenetree::qc::{
    assign_affordances, qc_clean, AffordanceAnnotation, QcConfig, QcCounts, QcReport,
};
use scenetree::serialization::open_jsonl;
use scenetree::stats::corpus_stats;
use scenetree::validate::Issue;
use scenetree::{validate_scene_with, JsonlError, SceneRecord, ValidationConfig};
use serde::{Deserialize, Serialize};

use crate::io::{emit_report, read_all, table_path, write_json, write_records, write_text};

#[derive(Serialize)]
struct RecordIssues {
    image_id: String,
    /// Input line, for lines that failed to parse.
    #[serde(skip_serializing_if = "Option::is_none")]
    line: Option<usize>,
    errors: Vec<Issue>,
    warnings: Vec<Issue>,
}

#[derive(Serialize)]
struct ValidateSummary {
    records: usize,
    errors: usize,
    warnings: usize,
    strict: bool,
    issues: Vec<RecordIssues>,
}

pub fn validate(
    input: &Path,
    strict: bool,
    containment_min: f64,
    report: Option<&Path>,
) -> Result<bool> {
    if !(0.0..=1.0).contains(&containment_min) {
        bail!("--containment-min must lie in [0, 1]");
    }
    let cfg = ValidationConfig { containment_min };
    let mut records = Vec::new();
    let mut issues = Vec::new();
    for item in
        open_jsonl::<SceneRecord>(input).with_context(|| format!("reading {}", input.display()))?
    {
        match item {
            Ok((_, r)) => records.push(r),
            Err(JsonlError::Line { line, message }) => issues.push(RecordIssues {
                image_id: String::new(),
                line: Some(line),
                errors: vec![Issue {
                    path: String::new(),
                    code: "MALFORMED_LINE".into(),
                    message,
                }],
                warnings: Vec::new(),
            }),
            Err(e) => return Err(e.into()),
        }
    }
    let count = records.len() + issues.len();
    issues.extend(
        records
            .par_iter()
            .map(|r| {
                let v = validate_scene_with(r, &cfg);
                RecordIssues {
                    image_id: r.image_id.clone(),
                    line: None,
                    errors: v.errors,
                    warnings: v.warnings,
                }
            })
            .filter(|r| !r.errors.is_empty() || !r.warnings.is_empty())
            .collect::<Vec<_>>(),
    );
    issues.sort_by(|a, b| (&a.image_id, a.line).cmp(&(&b.image_id, b.line)));

    let summary = ValidateSummary {
        records: count,
        errors: issues.iter().map(|r| r.errors.len()).sum(),
        warnings: issues.iter().map(|r| r.warnings.len()).sum(),
        strict,
        issues,
    };
    let mut table = String::new();
    for r in &summary.issues {
        let at = match r.line {
            Some(l) => format!("line {l}"),
            None => r.image_id.clone(),
        };
        for (kind, list) in [("error", &r.errors), ("warning", &r.warnings)] {
            for i in list {
                table.push_str(&format!("{kind:<8} {at}: {i}\n"));
            }
        }
    }
    table.push_str(&format!(
        "records {}  errors {}  warnings {}\n",
        summary.records, summary.errors, summary.warnings
    ));
    if let Some(path) = report {
        write_json(path, &summary)?;
        write_text(&table_path(path), &table)?;
    }
    print!("{table}");
    Ok(summary.errors == 0 && !(strict && summary.warnings > 0))
}

/// Affordance annotations for one object of one scene.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnotationGroup {
    image_id: String,
    object_index: usize,
    annotations: Vec<AffordanceAnnotation>,
}

#[derive(Serialize)]
struct ReconstructSummary {
    config: QcConfig,
    scenes: usize,
    annotations: usize,
    counts: QcCounts,
    provenance: QcReport,
}

pub fn reconstruct(
    scenes: &Path,
    annotations: &Path,
    out: &Path,
    report: Option<&Path>,
    cfg: QcConfig,
) -> Result<bool> {
    cfg.check().map_err(anyhow::Error::msg)?;
    let records: Vec<SceneRecord> = read_all(scenes)?;
    let groups: Vec<AnnotationGroup> = read_all(annotations)?;

    let index: HashMap<&str, &SceneRecord> =
        records.iter().map(|r| (r.image_id.as_str(), r)).collect();
    if index.len() != records.len() {
        bail!("{}: duplicate image_id", scenes.display());
    }
    // (image, object) -> annotations in file order
    let mut by_object: HashMap<&str, BTreeMap<usize, Vec<AffordanceAnnotation>>> = HashMap::new();
    let mut total = 0;
    for g in &groups {
        let Some(r) = index.get(g.image_id.as_str()) else {
            bail!(
                "{}: annotations for unknown image {:?}",
                annotations.display(),
                g.image_id
            );
        };
        if g.object_index >= r.objects.len() {
            bail!(
                "{}: image {:?} has {} objects, no object_index {}",
                annotations.display(),
                g.image_id,
                r.objects.len(),
                g.object_index
            );
        }
        total += g.annotations.len();
        by_object
            .entry(g.image_id.as_str())
            .or_default()
            .entry(g.object_index)
            .or_default()
            .extend(g.annotations.iter().cloned());
    }

    let results: Vec<(SceneRecord, QcReport)> = records
        .par_iter()
        .map(|r| {
            let mut rec = r.clone();
            let mut rep = QcReport::default();
            if let Some(objs) = by_object.get(r.image_id.as_str()) {
                for (&i, anns) in objs {
                    let (obj, mut part) = assign_affordances(&rec.objects[i], anns, &cfg);
                    part.tag_image(&r.image_id, i);
                    rec.objects[i] = obj;
                    rep.merge(part);
                }
            }
            let (clean, qc) = qc_clean(&rec, &cfg);
            rep.merge(qc);
            (clean, rep)
        })
        .collect();

    let mut order: Vec<usize> = (0..results.len()).collect();
    order.sort_by(|&a, &b| results[a].0.image_id.cmp(&results[b].0.image_id));
    let mut provenance = QcReport::default();
    let mut cleaned = Vec::with_capacity(results.len());
    for (rec, rep) in order.into_iter().map(|i| results[i].clone()) {
        provenance.merge(rep);
        cleaned.push(rec);
    }
    let counts = provenance.counts();
    if provenance.annotations_seen() != total {
        warn!(
            "{} annotations read but {} accounted for",
            total,
            provenance.annotations_seen()
        );
    }
    write_records(out, cleaned)?;

    let summary = ReconstructSummary {
        config: cfg,
        scenes: records.len(),
        annotations: total,
        counts,
        provenance,
    };
    let table = format!(
        "scenes                  {}\nannotations             {}\nassigned (textual)      {}\nassigned (geometric)    {}\ndropped (unassigned)    {}\ndropped (confidence)    {}\ndropped (duplicates)    {}\ndropped (containment)   {}\n",
        summary.scenes,
        summary.annotations,
        counts.assigned_textual,
        counts.assigned_geometric,
        counts.dropped_unassigned,
        counts.dropped_low_confidence,
        counts.dropped_duplicates,
        counts.dropped_containment
    );
    if let Some(path) = report {
        write_json(path, &summary)?;
        write_text(&table_path(path), &table)?;
    }
    print!("{table}");
    Ok(true)
}

pub fn complete(input: &Path, out: &Path) -> Result<bool> {
    let records: Vec<SceneRecord> = read_all(input)?;
    let completed: Vec<SceneRecord> = records.par_iter().map(pseudo_complete).collect();
    let changed = records
        .iter()
        .zip(&completed)
        .filter(|(a, b)| a != b)
        .count();
    write_records(out, completed)?;
    println!("records    {}\ncompleted  {changed}", records.len());
    Ok(true)
}

pub fn stats(input: &Path, top_k: usize, out: &Path) -> Result<bool> {
    let records: Vec<SceneRecord> = read_all(input)?;
    let report = corpus_stats(&records, top_k);
    emit_report(out, &report, &report.to_table())?;
    Ok(true)
}
