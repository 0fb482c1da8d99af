use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::corpus::{EvalConfig, EvalMode};
use super::matching::{LevelCounts, RecordCounts, PARSE_RATE_IOU};

/// Fraction as a percentage rounded to one decimal.
pub fn pct(x: f64) -> f64 {
    (x * 1000.0).round() / 10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelMetrics {
    #[serde(flatten)]
    pub counts: LevelCounts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub precision_pct: f64,
    pub recall_pct: f64,
    pub f1_pct: f64,
}

impl From<LevelCounts> for LevelMetrics {
    fn from(counts: LevelCounts) -> Self {
        let (p, r, f) = (counts.precision(), counts.recall(), counts.f1());
        Self {
            counts,
            precision: p,
            recall: r,
            f1: f,
            precision_pct: pct(p),
            recall_pct: pct(r),
            f1_pct: pct(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub iou: f64,
    pub l1: LevelMetrics,
    pub l2: LevelMetrics,
    pub l3: LevelMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: EvalMode,
    pub images: usize,
    pub thresholds: Vec<ThresholdReport>,
    pub parse_rate_iou: f64,
    pub parse_eligible: u64,
    pub parse_complete: u64,
    /// `None` when the corpus has no parse-eligible object.
    pub parse_rate: Option<f64>,
    pub parse_rate_pct: Option<f64>,
}

impl EvalReport {
    pub fn build(cfg: &EvalConfig, images: usize, totals: &RecordCounts) -> Self {
        let thresholds = cfg
            .thresholds
            .iter()
            .zip(&totals.levels)
            .map(|(&iou, [l1, l2, l3])| ThresholdReport {
                iou,
                l1: (*l1).into(),
                l2: (*l2).into(),
                l3: (*l3).into(),
            })
            .collect();
        let rate = totals.parse.rate();
        Self {
            mode: cfg.mode,
            images,
            thresholds,
            parse_rate_iou: PARSE_RATE_IOU,
            parse_eligible: totals.parse.eligible,
            parse_complete: totals.parse.complete,
            parse_rate: rate,
            parse_rate_pct: rate.map(pct),
        }
    }

    /// Human-readable table: one row per IoU threshold, P/R/F1 per level.
    pub fn to_table(&self) -> String {
        let mode = match self.mode {
            EvalMode::Object => "object",
            EvalMode::Scene => "scene",
        };
        let mut s = String::new();
        let _ = writeln!(s, "mode: {mode}  images: {}", self.images);
        let _ = writeln!(
            s,
            "{:<6}| {:^22} | {:^22} | {:^22} | {:>9}",
            "", "L1 (object)", "L2 (object-part)", "L3 (obj-part-aff)", ""
        );
        let _ = writeln!(
            s,
            "{:<6}| {:>6} {:>7} {:>7} | {:>6} {:>7} {:>7} | {:>6} {:>7} {:>7} | {:>9}",
            "IoU", "P", "R", "F1", "P", "R", "F1", "P", "R", "F1", "ParseRate"
        );
        let parse = self
            .parse_rate_pct
            .map(|v| format!("{v:.1}"))
            .unwrap_or_else(|| "n/a".to_string());
        for t in &self.thresholds {
            let _ = write!(s, "{:<6.2}|", t.iou);
            for l in [&t.l1, &t.l2, &t.l3] {
                let _ = write!(
                    s,
                    " {:>6.1} {:>7.1} {:>7.1} |",
                    l.precision_pct, l.recall_pct, l.f1_pct
                );
            }
            let _ = writeln!(s, " {parse:>9}");
        }
        let _ = writeln!(
            s,
            "ParseRate@{:.1}: {}/{} eligible objects complete",
            self.parse_rate_iou, self.parse_complete, self.parse_eligible
        );
        for t in &self.thresholds {
            let c = |l: &LevelMetrics| format!("{}/{}/{}", l.counts.tp, l.counts.fp, l.counts.fn_);
            let _ = writeln!(
                s,
                "counts@{:.2} tp/fp/fn: L1 {}  L2 {}  L3 {}",
                t.iou,
                c(&t.l1),
                c(&t.l2),
                c(&t.l3)
            );
        }
        s
    }
}
