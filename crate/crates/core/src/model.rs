//! The scene → object → part → affordance hierarchy.
//!
//! Labels are stored as given; identity comparisons go through
//! [`normalize_label`]. Placeholder nodes produced by structural completion
//! are recognized by their label literal.

use serde::{Deserialize, Serialize};

use crate::geometry::{BBox, Point};

/// Part name used for objects that carry no real parts.
pub const PLACEHOLDER_PART: &str = "__placeholder_part__";
/// Action used for parts that carry no real affordances.
pub const PLACEHOLDER_ACTION: &str = "__placeholder_action__";

/// Lowercase, trim, and collapse internal whitespace runs to one space.
pub fn normalize_label(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    out
}

/// Label identity under normalization.
pub fn labels_equal(a: &str, b: &str) -> bool {
    normalize_label(a) == normalize_label(b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Affordance {
    pub action: String,
    pub point: Point,
    /// Valid region for the point; only ground truth carries one.
    #[serde(rename = "affordance_bbox", default)]
    pub affordance_box: Option<BBox>,
}

impl Affordance {
    pub fn new(action: impl Into<String>, point: Point) -> Self {
        Self {
            action: action.into(),
            point,
            affordance_box: None,
        }
    }

    pub fn with_box(mut self, b: BBox) -> Self {
        self.affordance_box = Some(b);
        self
    }

    pub fn placeholder(point: Point) -> Self {
        Self::new(PLACEHOLDER_ACTION, point)
    }

    pub fn is_placeholder(&self) -> bool {
        normalize_label(&self.action) == PLACEHOLDER_ACTION
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartNode {
    #[serde(rename = "part_name")]
    pub name: String,
    pub bbox: BBox,
    #[serde(default)]
    pub affordances: Vec<Affordance>,
}

impl PartNode {
    pub fn new(name: impl Into<String>, bbox: BBox) -> Self {
        Self {
            name: name.into(),
            bbox,
            affordances: Vec::new(),
        }
    }

    pub fn with_affordances(mut self, affordances: Vec<Affordance>) -> Self {
        self.affordances = affordances;
        self
    }

    pub fn is_placeholder(&self) -> bool {
        normalize_label(&self.name) == PLACEHOLDER_PART
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectNode {
    pub name: String,
    pub bbox: BBox,
    #[serde(default)]
    pub parts: Vec<PartNode>,
}

impl ObjectNode {
    pub fn new(name: impl Into<String>, bbox: BBox) -> Self {
        Self {
            name: name.into(),
            bbox,
            parts: Vec::new(),
        }
    }

    pub fn with_parts(mut self, parts: Vec<PartNode>) -> Self {
        self.parts = parts;
        self
    }

    pub fn affordance_count(&self) -> usize {
        self.parts.iter().map(|p| p.affordances.len()).sum()
    }
}

/// One image with its object hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    /// Target object category; set only for object-level evaluation.
    #[serde(default)]
    pub target_category: Option<String>,
    #[serde(default)]
    pub objects: Vec<ObjectNode>,
}

impl SceneRecord {
    pub fn new(image_id: impl Into<String>, width: u32, height: u32) -> Self {
        Self {
            image_id: image_id.into(),
            width,
            height,
            target_category: None,
            objects: Vec::new(),
        }
    }

    pub fn with_objects(mut self, objects: Vec<ObjectNode>) -> Self {
        self.objects = objects;
        self
    }

    pub fn part_count(&self) -> usize {
        self.objects.iter().map(|o| o.parts.len()).sum()
    }

    pub fn affordance_count(&self) -> usize {
        self.objects.iter().map(ObjectNode::affordance_count).sum()
    }
}

/// Removes placeholder parts (with everything under them) and placeholder
/// affordances. Idempotent.
pub fn strip_placeholders(r: &SceneRecord) -> SceneRecord {
    let mut out = r.clone();
    strip_placeholders_in_place(&mut out);
    out
}

pub fn strip_placeholders_in_place(r: &mut SceneRecord) {
    for obj in &mut r.objects {
        obj.parts.retain(|p| !p.is_placeholder());
        for part in &mut obj.parts {
            part.affordances.retain(|a| !a.is_placeholder());
        }
    }
}

/// Which kinds of structural expansion a ground-truth object requires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Eligibility {
    None,
    PartsOnly,
    AffordancesOnly,
    Both,
}

impl Eligibility {
    pub fn requires_parts(self) -> bool {
        matches!(self, Eligibility::PartsOnly | Eligibility::Both)
    }

    pub fn requires_affordances(self) -> bool {
        matches!(self, Eligibility::AffordancesOnly | Eligibility::Both)
    }

    pub fn is_eligible(self) -> bool {
        self != Eligibility::None
    }
}

/// Expansion pattern of an object. Expects placeholders already stripped.
pub fn eligibility(o: &ObjectNode) -> Eligibility {
    let parts = !o.parts.is_empty();
    let affordances = o.parts.iter().any(|p| !p.affordances.is_empty());
    match (parts, affordances) {
        (false, false) => Eligibility::None,
        (true, false) => Eligibility::PartsOnly,
        (false, true) => Eligibility::AffordancesOnly,
        (true, true) => Eligibility::Both,
    }
}
