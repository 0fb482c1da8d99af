//! Hierarchy reconstruction from stage-wise annotations and quality control.
//!
//! Affordance annotations arrive detached from parts. [`assign_affordances`]
//! binds each one to a part of its object, by name when the annotation names
//! its interaction part and by geometry otherwise. [`qc_clean`] then enforces
//! containment between levels and removes near-duplicate siblings.

use serde::{Deserialize, Serialize};

use crate::geometry::{containment_ratio, iou, point_in_box, BBox, Point};
use crate::model::{normalize_label, Affordance, ObjectNode, PartNode, SceneRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffordanceAnnotation {
    pub action: String,
    pub point: Point,
    #[serde(rename = "box", default)]
    pub bbox: Option<BBox>,
    /// Free-form description of the part the action applies to.
    #[serde(default)]
    pub interaction_part: Option<String>,
    #[serde(default)]
    pub confidence: Option<f64>,
}

impl AffordanceAnnotation {
    pub fn new(action: impl Into<String>, point: Point) -> Self {
        Self {
            action: action.into(),
            point,
            bbox: None,
            interaction_part: None,
            confidence: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QcConfig {
    pub containment_min: f64,
    pub dup_iou: f64,
    pub min_confidence: f64,
}

impl Default for QcConfig {
    fn default() -> Self {
        Self {
            containment_min: 0.95,
            dup_iou: 0.9,
            min_confidence: 0.0,
        }
    }
}

impl QcConfig {
    pub fn check(&self) -> Result<(), String> {
        for (name, v) in [
            ("containment_min", self.containment_min),
            ("dup_iou", self.dup_iou),
            ("min_confidence", self.min_confidence),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        Ok(())
    }
}

/// Where an entry went and why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub image_id: String,
    /// Index path of the entry in the input, e.g. `objects[2].parts[0]`,
    /// or `objects[1].annotations[3]` for annotations.
    pub path: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QcReport {
    pub assigned_textual: Vec<Provenance>,
    pub assigned_geometric: Vec<Provenance>,
    pub dropped_unassigned: Vec<Provenance>,
    pub dropped_duplicates: Vec<Provenance>,
    pub dropped_containment: Vec<Provenance>,
    pub dropped_low_confidence: Vec<Provenance>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QcCounts {
    pub assigned_textual: usize,
    pub assigned_geometric: usize,
    pub dropped_unassigned: usize,
    pub dropped_duplicates: usize,
    pub dropped_containment: usize,
    pub dropped_low_confidence: usize,
}

impl QcReport {
    pub fn counts(&self) -> QcCounts {
        QcCounts {
            assigned_textual: self.assigned_textual.len(),
            assigned_geometric: self.assigned_geometric.len(),
            dropped_unassigned: self.dropped_unassigned.len(),
            dropped_duplicates: self.dropped_duplicates.len(),
            dropped_containment: self.dropped_containment.len(),
            dropped_low_confidence: self.dropped_low_confidence.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.counts() == QcCounts::default()
    }

    pub fn merge(&mut self, other: QcReport) {
        self.assigned_textual.extend(other.assigned_textual);
        self.assigned_geometric.extend(other.assigned_geometric);
        self.dropped_unassigned.extend(other.dropped_unassigned);
        self.dropped_duplicates.extend(other.dropped_duplicates);
        self.dropped_containment.extend(other.dropped_containment);
        self.dropped_low_confidence
            .extend(other.dropped_low_confidence);
    }

    /// Annotations accounted for by the assignment step.
    pub fn annotations_seen(&self) -> usize {
        let c = self.counts();
        c.assigned_textual + c.assigned_geometric + c.dropped_unassigned + c.dropped_low_confidence
    }

    /// Rewrites every provenance entry's image id; assignment runs per object
    /// and does not know it.
    pub fn tag_image(&mut self, image_id: &str, object_index: usize) {
        let prefix = format!("objects[{object_index}].");
        for list in [
            &mut self.assigned_textual,
            &mut self.assigned_geometric,
            &mut self.dropped_unassigned,
            &mut self.dropped_low_confidence,
        ] {
            for p in list.iter_mut() {
                p.image_id = image_id.to_string();
                if !p.path.starts_with("objects[") {
                    p.path = format!("{prefix}{}", p.path);
                }
            }
        }
    }
}

fn prov(image_id: &str, path: String, detail: String) -> Provenance {
    Provenance {
        image_id: image_id.to_string(),
        path,
        detail,
    }
}

/// Attaches annotations to the object's existing parts.
///
/// Per annotation: drop below `min_confidence`; otherwise assign textually
/// when `interaction_part` names an existing part, else geometrically to a
/// part whose box contains the point (largest share of the annotation box
/// inside the part, or the smallest containing part when there is no usable
/// annotation box); drop when no part contains the point.
pub fn assign_affordances(
    object: &ObjectNode,
    anns: &[AffordanceAnnotation],
    cfg: &QcConfig,
) -> (ObjectNode, QcReport) {
    let mut out = object.clone();
    let mut report = QcReport::default();
    let part_names: Vec<String> = object
        .parts
        .iter()
        .map(|p| normalize_label(&p.name))
        .collect();

    for (k, ann) in anns.iter().enumerate() {
        let path = format!("annotations[{k}]");
        let confidence = ann.confidence.unwrap_or(1.0);
        if confidence < cfg.min_confidence {
            report.dropped_low_confidence.push(prov(
                "",
                path,
                format!("confidence {confidence} < {}", cfg.min_confidence),
            ));
            continue;
        }
        let textual = ann.interaction_part.as_deref().and_then(|text| {
            let text = normalize_label(text);
            part_names
                .iter()
                .position(|n| !text.is_empty() && *n == text)
        });
        let (target, list) = match textual {
            Some(j) => (Some(j), &mut report.assigned_textual),
            None => (
                geometric_host(&object.parts, ann),
                &mut report.assigned_geometric,
            ),
        };
        let Some(j) = target else {
            report.dropped_unassigned.push(prov(
                "",
                path,
                format!("no part contains point ({}, {})", ann.point.x, ann.point.y),
            ));
            continue;
        };
        list.push(prov(
            "",
            path,
            format!("-> parts[{j}] {:?}", object.parts[j].name),
        ));
        out.parts[j].affordances.push(Affordance {
            action: ann.action.clone(),
            point: ann.point,
            affordance_box: ann.bbox,
        });
    }
    (out, report)
}

fn geometric_host(parts: &[PartNode], ann: &AffordanceAnnotation) -> Option<usize> {
    let containing = parts
        .iter()
        .enumerate()
        .filter(|(_, p)| p.bbox.is_valid() && point_in_box(&ann.point, &p.bbox));
    let usable_box = ann.bbox.filter(|b| b.is_valid() && b.area() > 0.0);
    let mut best: Option<(usize, f64, f64)> = None;
    for (j, p) in containing {
        let overlap = usable_box.map_or(0.0, |b| b.intersection_area(&p.bbox) / b.area());
        let area = p.bbox.area();
        let better = match best {
            None => true,
            // higher overlap wins, then smaller area, then earlier index
            Some((_, bo, ba)) => overlap > bo || (overlap == bo && area < ba),
        };
        if better {
            best = Some((j, overlap, area));
        }
    }
    best.map(|(j, _, _)| j)
}

/// Containment and duplicate cleanup of one record.
///
/// Parts covered less than `containment_min` by their object are removed
/// with their affordances; affordances whose point leaves the part box are
/// removed; among same-name siblings (objects, or parts of one object) with
/// IoU ≥ `dup_iou` the first is kept.
pub fn qc_clean(r: &SceneRecord, cfg: &QcConfig) -> (SceneRecord, QcReport) {
    let mut report = QcReport::default();
    let id = r.image_id.as_str();

    let mut kept_objects: Vec<(usize, ObjectNode)> = Vec::with_capacity(r.objects.len());
    for (i, obj) in r.objects.iter().enumerate() {
        if let Some((first, _)) = kept_objects
            .iter()
            .find(|(_, k)| is_duplicate(&k.name, &k.bbox, obj, cfg))
        {
            report.dropped_duplicates.push(prov(
                id,
                format!("objects[{i}]"),
                format!("duplicate of objects[{first}] {:?}", obj.name),
            ));
            continue;
        }
        let mut cleaned = ObjectNode::new(obj.name.clone(), obj.bbox);
        let mut kept_parts: Vec<usize> = Vec::new();
        for (j, part) in obj.parts.iter().enumerate() {
            let ppath = format!("objects[{i}].parts[{j}]");
            let ratio = containment_ratio(&part.bbox, &obj.bbox);
            if ratio < cfg.containment_min {
                report.dropped_containment.push(prov(
                    id,
                    ppath,
                    format!("part {:?} covered {ratio:.3} by its object", part.name),
                ));
                continue;
            }
            if let Some(&first) = kept_parts
                .iter()
                .find(|&&f| is_duplicate_part(&obj.parts[f], part, cfg))
            {
                report.dropped_duplicates.push(prov(
                    id,
                    ppath,
                    format!("duplicate of objects[{i}].parts[{first}] {:?}", part.name),
                ));
                continue;
            }
            kept_parts.push(j);
            let mut p = PartNode::new(part.name.clone(), part.bbox);
            for (k, aff) in part.affordances.iter().enumerate() {
                if point_in_box(&aff.point, &part.bbox) {
                    p.affordances.push(aff.clone());
                } else {
                    report.dropped_containment.push(prov(
                        id,
                        format!("{ppath}.affordances[{k}]"),
                        format!("point ({}, {}) outside part box", aff.point.x, aff.point.y),
                    ));
                }
            }
            cleaned.parts.push(p);
        }
        kept_objects.push((i, cleaned));
    }

    let mut out = r.clone();
    out.objects = kept_objects.into_iter().map(|(_, o)| o).collect();
    (out, report)
}

fn is_duplicate(kept_name: &str, kept_box: &BBox, cand: &ObjectNode, cfg: &QcConfig) -> bool {
    normalize_label(kept_name) == normalize_label(&cand.name)
        && iou(kept_box, &cand.bbox).is_ok_and(|v| v > 0.0 && v >= cfg.dup_iou)
}

fn is_duplicate_part(kept: &PartNode, cand: &PartNode, cfg: &QcConfig) -> bool {
    normalize_label(&kept.name) == normalize_label(&cand.name)
        && iou(&kept.bbox, &cand.bbox).is_ok_and(|v| v > 0.0 && v >= cfg.dup_iou)
}
