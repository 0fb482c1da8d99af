//! Read-time structural checks on a [`SceneRecord`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{containment_ratio, point_in_box, BBox, Point};
use crate::model::{normalize_label, SceneRecord};

pub const BOX_ORDER: &str = "BOX_ORDER";
pub const NON_FINITE: &str = "NON_FINITE";
pub const OUT_OF_BOUNDS: &str = "OUT_OF_BOUNDS";
pub const EMPTY_LABEL: &str = "EMPTY_LABEL";
pub const IMAGE_SIZE: &str = "IMAGE_SIZE";
pub const PLACEHOLDER_CHILD: &str = "PLACEHOLDER_CHILD";
pub const CONTAINMENT: &str = "CONTAINMENT";
pub const POINT_OUTSIDE: &str = "POINT_OUTSIDE";
pub const DEGENERATE_BOX: &str = "DEGENERATE_BOX";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub path: String,
    pub code: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}] {}", self.path, self.code, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn warnings_with_code<'a>(&'a self, code: &'a str) -> impl Iterator<Item = &'a Issue> + 'a {
        self.warnings.iter().filter(move |w| w.code == code)
    }

    fn error(&mut self, path: &str, code: &str, message: String) {
        self.errors.push(Issue {
            path: path.to_string(),
            code: code.to_string(),
            message,
        });
    }

    fn warn(&mut self, path: &str, code: &str, message: String) {
        self.warnings.push(Issue {
            path: path.to_string(),
            code: code.to_string(),
            message,
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationConfig {
    /// Minimum `area(part ∩ object) / area(part)` before a containment warning.
    pub containment_min: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            containment_min: 0.95,
        }
    }
}

pub fn validate_scene(r: &SceneRecord) -> ValidationReport {
    validate_scene_with(r, &ValidationConfig::default())
}

pub fn validate_scene_with(r: &SceneRecord, cfg: &ValidationConfig) -> ValidationReport {
    let mut rep = ValidationReport::default();
    if r.width == 0 || r.height == 0 {
        rep.error(
            "",
            IMAGE_SIZE,
            format!("image size must be positive, got {}x{}", r.width, r.height),
        );
    }
    let (w, h) = (f64::from(r.width), f64::from(r.height));

    for (i, obj) in r.objects.iter().enumerate() {
        let opath = format!("objects[{i}]");
        check_label(&mut rep, &format!("{opath}.name"), &obj.name);
        let obj_ok = check_box(&mut rep, &format!("{opath}.bbox"), &obj.bbox, w, h);

        for (j, part) in obj.parts.iter().enumerate() {
            let ppath = format!("{opath}.parts[{j}]");
            check_label(&mut rep, &format!("{ppath}.part_name"), &part.name);
            let part_ok = check_box(&mut rep, &format!("{ppath}.bbox"), &part.bbox, w, h);
            if obj_ok && part_ok {
                let ratio = containment_ratio(&part.bbox, &obj.bbox);
                if ratio < cfg.containment_min {
                    rep.warn(
                        &ppath,
                        CONTAINMENT,
                        format!(
                            "part box covered {:.3} by object box (< {:.3})",
                            ratio, cfg.containment_min
                        ),
                    );
                }
            }
            let placeholder_part = part.is_placeholder();

            for (k, aff) in part.affordances.iter().enumerate() {
                let apath = format!("{ppath}.affordances[{k}]");
                check_label(&mut rep, &format!("{apath}.action"), &aff.action);
                if placeholder_part && !aff.is_placeholder() {
                    rep.error(
                        &apath,
                        PLACEHOLDER_CHILD,
                        format!("placeholder part carries real affordance {:?}", aff.action),
                    );
                }
                let point_ok = check_point(&mut rep, &format!("{apath}.point"), &aff.point, w, h);
                if let Some(ab) = &aff.affordance_box {
                    check_box(&mut rep, &format!("{apath}.affordance_bbox"), ab, w, h);
                }
                if point_ok && part_ok && !point_in_box(&aff.point, &part.bbox) {
                    rep.warn(
                        &apath,
                        POINT_OUTSIDE,
                        format!(
                            "point ({}, {}) lies outside its part box",
                            aff.point.x, aff.point.y
                        ),
                    );
                }
            }
        }
    }
    rep
}

fn check_label(rep: &mut ValidationReport, path: &str, label: &str) {
    if normalize_label(label).is_empty() {
        rep.error(
            path,
            EMPTY_LABEL,
            "label is empty after normalization".into(),
        );
    }
}

/// Returns whether the box is usable for geometric checks.
fn check_box(rep: &mut ValidationReport, path: &str, b: &BBox, w: f64, h: f64) -> bool {
    let coords = [b.x1, b.y1, b.x2, b.y2];
    if coords.iter().any(|c| !c.is_finite()) {
        rep.error(
            path,
            NON_FINITE,
            format!("non-finite coordinate in {coords:?}"),
        );
        return false;
    }
    let mut ok = true;
    if b.x1 > b.x2 || b.y1 > b.y2 {
        rep.error(path, BOX_ORDER, format!("corners out of order: {coords:?}"));
        ok = false;
    }
    if coords.iter().any(|&c| c < 0.0) || b.x1.max(b.x2) > w || b.y1.max(b.y2) > h {
        rep.error(
            path,
            OUT_OF_BOUNDS,
            format!("box {coords:?} exceeds image extent {w}x{h}"),
        );
        ok = false;
    }
    if ok && b.is_degenerate() {
        rep.warn(path, DEGENERATE_BOX, format!("zero-area box {coords:?}"));
    }
    ok
}

fn check_point(rep: &mut ValidationReport, path: &str, p: &Point, w: f64, h: f64) -> bool {
    if !p.x.is_finite() || !p.y.is_finite() {
        rep.error(
            path,
            NON_FINITE,
            format!("non-finite point ({}, {})", p.x, p.y),
        );
        return false;
    }
    if p.x < 0.0 || p.y < 0.0 || p.x > w || p.y > h {
        rep.error(
            path,
            OUT_OF_BOUNDS,
            format!("point ({}, {}) outside image extent {w}x{h}", p.x, p.y),
        );
        return false;
    }
    true
}
