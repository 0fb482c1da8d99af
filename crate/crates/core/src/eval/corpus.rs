use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matching::{check_threshold, evaluate_record, RecordCounts};
use super::report::EvalReport;
use crate::error::EvalError;
use crate::model::{normalize_label, strip_placeholders, SceneRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// Ground truth restricted to each record's `target_category`.
    Object,
    /// Every ground-truth object counts.
    #[default]
    Scene,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub thresholds: Vec<f64>,
    pub mode: EvalMode,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            thresholds: vec![0.5],
            mode: EvalMode::Scene,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalOutput {
    pub report: EvalReport,
    /// Non-fatal join problems, e.g. predictions without ground truth.
    pub warnings: Vec<String>,
}

/// Joins predictions to ground truth on `image_id` and accumulates counts.
///
/// Placeholders are stripped from both sides. Ground-truth records without a
/// prediction are scored against an empty prediction.
pub fn evaluate_corpus(
    preds: &[SceneRecord],
    gts: &[SceneRecord],
    cfg: &EvalConfig,
) -> Result<EvalOutput, EvalError> {
    if cfg.thresholds.is_empty() {
        return Err(EvalError::NoThresholds);
    }
    for &t in &cfg.thresholds {
        check_threshold(t)?;
    }

    let mut seen = HashSet::with_capacity(gts.len());
    for g in gts {
        if !seen.insert(g.image_id.as_str()) {
            return Err(EvalError::DuplicateImage {
                image_id: g.image_id.clone(),
                stream: "ground-truth",
            });
        }
        if cfg.mode == EvalMode::Object && g.target_category.is_none() {
            return Err(EvalError::MissingTargetCategory(g.image_id.clone()));
        }
    }
    let mut by_id: HashMap<&str, &SceneRecord> = HashMap::with_capacity(preds.len());
    for p in preds {
        if by_id.insert(p.image_id.as_str(), p).is_some() {
            return Err(EvalError::DuplicateImage {
                image_id: p.image_id.clone(),
                stream: "prediction",
            });
        }
    }

    let mut warnings = Vec::new();
    let mut orphans: Vec<&str> = preds
        .iter()
        .map(|p| p.image_id.as_str())
        .filter(|id| !seen.contains(id))
        .collect();
    orphans.sort_unstable();
    for id in orphans {
        warnings.push(format!("prediction {id:?} has no ground truth; skipped"));
    }
    let mut missing: Vec<&str> = gts
        .iter()
        .map(|g| g.image_id.as_str())
        .filter(|id| !by_id.contains_key(id))
        .collect();
    missing.sort_unstable();
    for id in missing {
        warnings.push(format!(
            "no prediction for {id:?}; its ground truth counts as missed"
        ));
    }

    let n = cfg.thresholds.len();
    let totals = gts
        .par_iter()
        .map(|g| {
            let gt = prepare_gt(g, cfg.mode);
            let pred = match by_id.get(g.image_id.as_str()) {
                Some(p) => strip_placeholders(p),
                None => SceneRecord::new(g.image_id.clone(), g.width, g.height),
            };
            evaluate_record(&pred, &gt, &cfg.thresholds)
        })
        .try_fold(|| RecordCounts::zero(n), |acc, c| c.map(|c| acc.merge(&c)))
        .try_reduce(|| RecordCounts::zero(n), |a, b| Ok(a.merge(&b)))?;

    Ok(EvalOutput {
        report: EvalReport::build(cfg, gts.len(), &totals),
        warnings,
    })
}

fn prepare_gt(g: &SceneRecord, mode: EvalMode) -> SceneRecord {
    let mut gt = strip_placeholders(g);
    if mode == EvalMode::Object {
        if let Some(target) = &g.target_category {
            let target = normalize_label(target);
            gt.objects.retain(|o| normalize_label(&o.name) == target);
        }
    }
    gt
}
