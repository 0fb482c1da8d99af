//! Brute-force reference evaluator, written directly from the protocol text
//! without reusing any library matching code. Slow on purpose: every greedy
//! step rescans all remaining candidate pairs.

use scenetree::{ObjectNode, PartNode, SceneRecord};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OracleResult {
    /// Per threshold: L1, L2, L3.
    pub levels: Vec<[Counts; 3]>,
    pub complete: u64,
    pub eligible: u64,
}

impl OracleResult {
    pub fn add(&mut self, other: &OracleResult) {
        if self.levels.is_empty() {
            self.levels = vec![[Counts::default(); 3]; other.levels.len()];
        }
        for (a, b) in self.levels.iter_mut().zip(&other.levels) {
            for l in 0..3 {
                a[l].tp += b[l].tp;
                a[l].fp += b[l].fp;
                a[l].fn_ += b[l].fn_;
            }
        }
        self.complete += other.complete;
        self.eligible += other.eligible;
    }
}

fn norm(s: &str) -> String {
    let words: Vec<String> = s.split_whitespace().map(|w| w.to_lowercase()).collect();
    words.join(" ")
}

fn is_placeholder_part(p: &PartNode) -> bool {
    p.name == "__placeholder_part__"
}

fn ordered(b: &scenetree::BBox) -> bool {
    [b.x1, b.y1, b.x2, b.y2].iter().all(|c| c.is_finite()) && b.x1 <= b.x2 && b.y1 <= b.y2
}

fn box_iou(a: &scenetree::BBox, b: &scenetree::BBox) -> f64 {
    let w = (a.x2.min(b.x2) - a.x1.max(b.x1)).max(0.0);
    let h = (a.y2.min(b.y2) - a.y1.max(b.y1)).max(0.0);
    let inter = w * h;
    let union = (a.x2 - a.x1) * (a.y2 - a.y1) + (b.x2 - b.x1) * (b.y2 - b.y1) - inter;
    if union > 0.0 {
        inter / union
    } else {
        0.0
    }
}

fn inside(x: f64, y: f64, b: &scenetree::BBox) -> bool {
    b.x1 <= x && x <= b.x2 && b.y1 <= y && y <= b.y2
}

/// Repeatedly takes the best remaining (pred, gt) pair: highest IoU, then
/// lowest pred index, then lowest gt index.
fn greedy(
    names_p: &[String],
    boxes_p: &[scenetree::BBox],
    names_g: &[String],
    boxes_g: &[scenetree::BBox],
    tau: f64,
) -> Vec<(usize, usize)> {
    let mut used_p = vec![false; names_p.len()];
    let mut used_g = vec![false; names_g.len()];
    let mut out = Vec::new();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..names_p.len() {
            if used_p[i] || !ordered(&boxes_p[i]) {
                continue;
            }
            for j in 0..names_g.len() {
                if used_g[j] || !ordered(&boxes_g[j]) || names_p[i] != names_g[j] {
                    continue;
                }
                let v = box_iou(&boxes_p[i], &boxes_g[j]);
                if v < tau {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bv, bi, bj)) => v > bv || (v == bv && (i, j) < (bi, bj)),
                };
                if better {
                    best = Some((v, i, j));
                }
            }
        }
        match best {
            Some((_, i, j)) => {
                used_p[i] = true;
                used_g[j] = true;
                out.push((i, j));
            }
            None => return out,
        }
    }
}

fn strip(r: &SceneRecord) -> Vec<ObjectNode> {
    r.objects
        .iter()
        .map(|o| {
            let mut o = o.clone();
            o.parts.retain(|p| !is_placeholder_part(p));
            for p in &mut o.parts {
                p.affordances
                    .retain(|a| a.action != "__placeholder_action__");
            }
            o
        })
        .collect()
}

fn object_pairs(pred: &[ObjectNode], gt: &[ObjectNode], tau: f64) -> Vec<(usize, usize)> {
    let np: Vec<String> = pred.iter().map(|o| norm(&o.name)).collect();
    let ng: Vec<String> = gt.iter().map(|o| norm(&o.name)).collect();
    let bp: Vec<_> = pred.iter().map(|o| o.bbox).collect();
    let bg: Vec<_> = gt.iter().map(|o| o.bbox).collect();
    greedy(&np, &bp, &ng, &bg, tau)
}

fn part_pairs(pred: &ObjectNode, gt: &ObjectNode, tau: f64) -> Vec<(usize, usize)> {
    let np: Vec<String> = pred.parts.iter().map(|p| norm(&p.name)).collect();
    let ng: Vec<String> = gt.parts.iter().map(|p| norm(&p.name)).collect();
    let bp: Vec<_> = pred.parts.iter().map(|p| p.bbox).collect();
    let bg: Vec<_> = gt.parts.iter().map(|p| p.bbox).collect();
    greedy(&np, &bp, &ng, &bg, tau)
}

/// Affordances of one matched part pair, in prediction order, each taking
/// the first still-free ground-truth affordance it validly hits.
fn affordance_tp(pred: &PartNode, gt: &PartNode) -> u64 {
    let mut taken = vec![false; gt.affordances.len()];
    let mut tp = 0;
    for a in &pred.affordances {
        for (l, g) in gt.affordances.iter().enumerate() {
            if taken[l] || norm(&a.action) != norm(&g.action) {
                continue;
            }
            let region = g.affordance_box.unwrap_or(gt.bbox);
            if inside(a.point.x, a.point.y, &region) {
                taken[l] = true;
                tp += 1;
                break;
            }
        }
    }
    tp
}

/// Scores one (prediction, ground truth) record pair.
pub fn evaluate(pred: &SceneRecord, gt: &SceneRecord, thresholds: &[f64]) -> OracleResult {
    let pred = strip(pred);
    let gt = strip(gt);

    let mut res = OracleResult::default();
    for &tau in thresholds {
        let objs = object_pairs(&pred, &gt, tau);

        // L1: unmatched predicted objects are FP, unmatched GT objects FN.
        let l1 = Counts {
            tp: objs.len() as u64,
            fp: (0..pred.len())
                .filter(|i| !objs.iter().any(|m| m.0 == *i))
                .count() as u64,
            fn_: (0..gt.len())
                .filter(|j| !objs.iter().any(|m| m.1 == *j))
                .count() as u64,
        };

        // L2: parts only match inside matched object pairs; every other
        // part is charged to its own side.
        let mut l2 = Counts::default();
        let mut l3 = Counts::default();
        let mut matched_parts_pred = vec![Vec::new(); pred.len()];
        let mut matched_parts_gt = vec![Vec::new(); gt.len()];
        for &(i, j) in &objs {
            for (pi, gj) in part_pairs(&pred[i], &gt[j], tau) {
                l2.tp += 1;
                matched_parts_pred[i].push(pi);
                matched_parts_gt[j].push(gj);
                l3.tp += affordance_tp(&pred[i].parts[pi], &gt[j].parts[gj]);
            }
        }
        let pred_parts: u64 = pred.iter().map(|o| o.parts.len() as u64).sum();
        let gt_parts: u64 = gt.iter().map(|o| o.parts.len() as u64).sum();
        let mut unmatched_pred_parts = 0;
        for (i, o) in pred.iter().enumerate() {
            for k in 0..o.parts.len() {
                if !matched_parts_pred[i].contains(&k) {
                    unmatched_pred_parts += 1;
                }
            }
        }
        let mut unmatched_gt_parts = 0;
        for (j, o) in gt.iter().enumerate() {
            for k in 0..o.parts.len() {
                if !matched_parts_gt[j].contains(&k) {
                    unmatched_gt_parts += 1;
                }
            }
        }
        l2.fp = unmatched_pred_parts;
        l2.fn_ = unmatched_gt_parts;
        assert_eq!(l2.tp + l2.fp, pred_parts);
        assert_eq!(l2.tp + l2.fn_, gt_parts);

        // L3: every affordance not in a matched chain is charged.
        let pred_affs: u64 = pred
            .iter()
            .flat_map(|o| &o.parts)
            .map(|p| p.affordances.len() as u64)
            .sum();
        let gt_affs: u64 = gt
            .iter()
            .flat_map(|o| &o.parts)
            .map(|p| p.affordances.len() as u64)
            .sum();
        l3.fp = pred_affs - l3.tp;
        l3.fn_ = gt_affs - l3.tp;

        res.levels.push([l1, l2, l3]);
    }

    // ParseRate at IoU 0.5, independent of the threshold list.
    let objs = object_pairs(&pred, &gt, 0.5);
    for (j, g) in gt.iter().enumerate() {
        let needs_parts = !g.parts.is_empty();
        let needs_affs = g.parts.iter().any(|p| !p.affordances.is_empty());
        if !needs_parts && !needs_affs {
            continue;
        }
        res.eligible += 1;
        let Some(&(i, _)) = objs.iter().find(|m| m.1 == j) else {
            continue;
        };
        let p = &pred[i];
        let has_parts = !p.parts.is_empty();
        let has_affs = p.parts.iter().any(|q| !q.affordances.is_empty());
        if (!needs_parts || has_parts) && (!needs_affs || has_affs) {
            res.complete += 1;
        }
    }
    res
}
