//! Conditional greedy matching at the object, part and affordance levels.
//!
//! Objects and parts are paired greedily by IoU (descending, ties broken by
//! predicted index then ground-truth index) among candidates with equal
//! normalized names and IoU at or above the threshold. Parts are matched only
//! inside matched object pairs and affordances only inside matched part
//! pairs; entities below an unmatched parent can never be true positives and
//! count as false positives (prediction side) or false negatives (ground-truth
//! side).

use std::cmp::Ordering;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::geometry::{iou, point_in_box, BBox};
use crate::model::{eligibility, normalize_label, SceneRecord};

/// IoU threshold at which ParseRate matches objects.
pub const PARSE_RATE_IOU: f64 = 0.5;

/// One accepted pairing. Indices address the respective trees:
/// `usize` for objects, `[object, part]` for parts, and
/// `[object, part, affordance]` for affordances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchPair<I> {
    pub pred: I,
    pub gt: I,
    /// IoU of the pair; absent for affordances.
    pub score: Option<f64>,
}

pub type ObjectPair = MatchPair<usize>;
pub type PartPair = MatchPair<[usize; 2]>;
pub type AffordancePair = MatchPair<[usize; 3]>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl LevelCounts {
    pub fn new(tp: u64, fp: u64, fn_: u64) -> Self {
        Self { tp, fp, fn_ }
    }

    fn from_totals(tp: usize, n_pred: usize, n_gt: usize) -> Self {
        Self::new(tp as u64, (n_pred - tp) as u64, (n_gt - tp) as u64)
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r > 0.0 {
            2.0 * p * r / (p + r)
        } else {
            0.0
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Add for LevelCounts {
    type Output = LevelCounts;
    fn add(self, o: LevelCounts) -> LevelCounts {
        LevelCounts::new(self.tp + o.tp, self.fp + o.fp, self.fn_ + o.fn_)
    }
}

impl AddAssign for LevelCounts {
    fn add_assign(&mut self, o: LevelCounts) {
        *self = *self + o;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseRateCounts {
    pub complete: u64,
    pub eligible: u64,
}

impl ParseRateCounts {
    /// `None` when no ground-truth object is parse-eligible.
    pub fn rate(&self) -> Option<f64> {
        (self.eligible > 0).then(|| self.complete as f64 / self.eligible as f64)
    }
}

impl Add for ParseRateCounts {
    type Output = ParseRateCounts;
    fn add(self, o: ParseRateCounts) -> ParseRateCounts {
        ParseRateCounts {
            complete: self.complete + o.complete,
            eligible: self.eligible + o.eligible,
        }
    }
}

impl AddAssign for ParseRateCounts {
    fn add_assign(&mut self, o: ParseRateCounts) {
        *self = *self + o;
    }
}

pub fn check_threshold(tau: f64) -> Result<(), EvalError> {
    if tau > 0.0 && tau <= 1.0 {
        Ok(())
    } else {
        Err(EvalError::Threshold(tau))
    }
}

/// Greedy one-to-one assignment over `(name, box)` entities.
///
/// Returns `(pred index, gt index, iou)` in acceptance order. Malformed boxes
/// never form candidates.
fn greedy_iou<'a>(
    pred: impl Iterator<Item = (&'a str, &'a BBox)>,
    gt: impl Iterator<Item = (&'a str, &'a BBox)> + Clone,
    tau: f64,
) -> Vec<(usize, usize, f64)> {
    let gt: Vec<(String, &BBox)> = gt.map(|(n, b)| (normalize_label(n), b)).collect();
    let mut candidates = Vec::new();
    let mut n_pred = 0;
    for (i, (name, pb)) in pred.enumerate() {
        n_pred += 1;
        let name = normalize_label(name);
        for (j, (gname, gb)) in gt.iter().enumerate() {
            if *gname != name {
                continue;
            }
            if let Ok(v) = iou(pb, gb) {
                if v >= tau {
                    candidates.push((i, j, v));
                }
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.2.partial_cmp(&a.2)
            .unwrap_or(Ordering::Equal)
            .then(a.0.cmp(&b.0))
            .then(a.1.cmp(&b.1))
    });
    let mut pred_used = vec![false; n_pred];
    let mut gt_used = vec![false; gt.len()];
    let mut accepted = Vec::new();
    for (i, j, v) in candidates {
        if !pred_used[i] && !gt_used[j] {
            pred_used[i] = true;
            gt_used[j] = true;
            accepted.push((i, j, v));
        }
    }
    accepted
}

/// Level 1: objects with equal names and IoU ≥ `tau`.
pub fn match_objects(
    pred: &SceneRecord,
    gt: &SceneRecord,
    tau: f64,
) -> Result<(Vec<ObjectPair>, LevelCounts), EvalError> {
    check_threshold(tau)?;
    let pairs: Vec<ObjectPair> = greedy_iou(
        pred.objects.iter().map(|o| (o.name.as_str(), &o.bbox)),
        gt.objects.iter().map(|o| (o.name.as_str(), &o.bbox)),
        tau,
    )
    .into_iter()
    .map(|(i, j, v)| MatchPair {
        pred: i,
        gt: j,
        score: Some(v),
    })
    .collect();
    let counts = LevelCounts::from_totals(pairs.len(), pred.objects.len(), gt.objects.len());
    Ok((pairs, counts))
}

/// Level 2: parts matched inside each matched object pair.
pub fn match_parts(
    object_pairs: &[ObjectPair],
    pred: &SceneRecord,
    gt: &SceneRecord,
    tau: f64,
) -> (Vec<PartPair>, LevelCounts) {
    let mut pairs = Vec::new();
    for op in object_pairs {
        let (po, go) = (&pred.objects[op.pred], &gt.objects[op.gt]);
        let accepted = greedy_iou(
            po.parts.iter().map(|p| (p.name.as_str(), &p.bbox)),
            go.parts.iter().map(|p| (p.name.as_str(), &p.bbox)),
            tau,
        );
        pairs.extend(accepted.into_iter().map(|(i, j, v)| MatchPair {
            pred: [op.pred, i],
            gt: [op.gt, j],
            score: Some(v),
        }));
    }
    let counts = LevelCounts::from_totals(pairs.len(), pred.part_count(), gt.part_count());
    (pairs, counts)
}

/// Level 3: affordances matched inside each matched part pair by equal action
/// and a predicted point inside the ground-truth valid region (affordance box,
/// or the ground-truth part box when none is recorded). Greedy in index order.
pub fn match_affordances(
    part_pairs: &[PartPair],
    pred: &SceneRecord,
    gt: &SceneRecord,
) -> (Vec<AffordancePair>, LevelCounts) {
    let mut pairs = Vec::new();
    for pp in part_pairs {
        let pp_part = &pred.objects[pp.pred[0]].parts[pp.pred[1]];
        let gt_part = &gt.objects[pp.gt[0]].parts[pp.gt[1]];
        let gt_keys: Vec<(String, &BBox)> = gt_part
            .affordances
            .iter()
            .map(|a| {
                (
                    normalize_label(&a.action),
                    a.affordance_box.as_ref().unwrap_or(&gt_part.bbox),
                )
            })
            .collect();
        let mut gt_used = vec![false; gt_keys.len()];
        for (k, pa) in pp_part.affordances.iter().enumerate() {
            let action = normalize_label(&pa.action);
            let hit = gt_keys.iter().enumerate().position(|(l, (ga, region))| {
                !gt_used[l] && *ga == action && point_in_box(&pa.point, region)
            });
            if let Some(l) = hit {
                gt_used[l] = true;
                pairs.push(MatchPair {
                    pred: [pp.pred[0], pp.pred[1], k],
                    gt: [pp.gt[0], pp.gt[1], l],
                    score: None,
                });
            }
        }
    }
    let counts =
        LevelCounts::from_totals(pairs.len(), pred.affordance_count(), gt.affordance_count());
    (pairs, counts)
}

/// Structural completeness of parse-eligible ground-truth objects, matched
/// at IoU 0.5.
pub fn parse_rate(pred: &SceneRecord, gt: &SceneRecord) -> ParseRateCounts {
    let (pairs, _) = match_objects(pred, gt, PARSE_RATE_IOU).expect("0.5 is a valid threshold");
    parse_rate_from_pairs(&pairs, pred, gt)
}

fn parse_rate_from_pairs(
    pairs: &[ObjectPair],
    pred: &SceneRecord,
    gt: &SceneRecord,
) -> ParseRateCounts {
    let mut counts = ParseRateCounts::default();
    for (j, go) in gt.objects.iter().enumerate() {
        let pattern = eligibility(go);
        if !pattern.is_eligible() {
            continue;
        }
        counts.eligible += 1;
        let Some(pair) = pairs.iter().find(|p| p.gt == j) else {
            continue;
        };
        let po = &pred.objects[pair.pred];
        let parts_ok = !pattern.requires_parts() || !po.parts.is_empty();
        let affs_ok = !pattern.requires_affordances() || po.affordance_count() > 0;
        if parts_ok && affs_ok {
            counts.complete += 1;
        }
    }
    counts
}

/// Per-record counts for every threshold plus ParseRate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecordCounts {
    /// `levels[t]` holds L1, L2, L3 counts at threshold `t`.
    pub levels: Vec<[LevelCounts; 3]>,
    pub parse: ParseRateCounts,
}

impl RecordCounts {
    pub fn zero(n_thresholds: usize) -> Self {
        Self {
            levels: vec![[LevelCounts::default(); 3]; n_thresholds],
            parse: ParseRateCounts::default(),
        }
    }

    pub fn merge(mut self, other: &RecordCounts) -> Self {
        for (a, b) in self.levels.iter_mut().zip(&other.levels) {
            for l in 0..3 {
                a[l] += b[l];
            }
        }
        self.parse += other.parse;
        self
    }
}

/// Runs all three levels at each threshold plus ParseRate on one record
/// pair. Inputs must already be placeholder-free.
pub fn evaluate_record(
    pred: &SceneRecord,
    gt: &SceneRecord,
    thresholds: &[f64],
) -> Result<RecordCounts, EvalError> {
    let mut levels = Vec::with_capacity(thresholds.len());
    let mut parse = None;
    for &tau in thresholds {
        let (objects, l1) = match_objects(pred, gt, tau)?;
        let (parts, l2) = match_parts(&objects, pred, gt, tau);
        let (_, l3) = match_affordances(&parts, pred, gt);
        if tau == PARSE_RATE_IOU {
            parse = Some(parse_rate_from_pairs(&objects, pred, gt));
        }
        levels.push([l1, l2, l3]);
    }
    let parse = parse.unwrap_or_else(|| parse_rate(pred, gt));
    Ok(RecordCounts { levels, parse })
}
