//! Flat object–part–affordance triplets and their conversion to and from the
//! nested hierarchy.
//!
//! Grouping keys are the normalized label plus the bit-exact box, so two
//! triplets share an object only when they name it identically (up to case
//! and whitespace) and repeat the same box.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::ParseError;
use crate::geometry::{BBox, Point};
use crate::model::{normalize_label, Affordance, ObjectNode, PartNode, SceneRecord};
use crate::serialization::json::{self, Value};
use crate::serialization::tokens::{decode_box, decode_point, TokenSyntax};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripletRecord {
    pub object: String,
    pub object_box: BBox,
    pub part: String,
    pub part_box: BBox,
    pub action: String,
    pub affordance_point: Point,
}

/// A flat prediction for one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatScene {
    #[serde(default)]
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    pub triplets: Vec<TripletRecord>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConversionReport {
    /// Indices of triplets whose affordance repeated an earlier one.
    pub dropped_duplicates: Vec<usize>,
}

type BoxKey = [u64; 4];
/// Normalized action and point bits.
type AffordanceKey = (String, [u64; 2]);

fn box_key(b: &BBox) -> BoxKey {
    [
        b.x1.to_bits(),
        b.y1.to_bits(),
        b.x2.to_bits(),
        b.y2.to_bits(),
    ]
}

/// Groups triplets into objects, then parts, in first-appearance order.
pub fn to_hierarchy(scene: &FlatScene) -> (SceneRecord, ConversionReport) {
    let mut objects: Vec<ObjectNode> = Vec::new();
    let mut object_index: HashMap<(String, BoxKey), usize> = HashMap::new();
    let mut part_index: HashMap<(usize, String, BoxKey), usize> = HashMap::new();
    let mut seen_affordances: HashMap<(usize, usize), Vec<AffordanceKey>> = HashMap::new();
    let mut report = ConversionReport::default();

    for (t, tr) in scene.triplets.iter().enumerate() {
        let oi = *object_index
            .entry((normalize_label(&tr.object), box_key(&tr.object_box)))
            .or_insert_with(|| {
                objects.push(ObjectNode::new(tr.object.clone(), tr.object_box));
                objects.len() - 1
            });
        let parts = &mut objects[oi].parts;
        let pi = *part_index
            .entry((oi, normalize_label(&tr.part), box_key(&tr.part_box)))
            .or_insert_with(|| {
                parts.push(PartNode::new(tr.part.clone(), tr.part_box));
                parts.len() - 1
            });
        let key = (
            normalize_label(&tr.action),
            [
                tr.affordance_point.x.to_bits(),
                tr.affordance_point.y.to_bits(),
            ],
        );
        let seen = seen_affordances.entry((oi, pi)).or_default();
        if seen.contains(&key) {
            report.dropped_duplicates.push(t);
            continue;
        }
        seen.push(key);
        parts[pi]
            .affordances
            .push(Affordance::new(tr.action.clone(), tr.affordance_point));
    }

    let record =
        SceneRecord::new(scene.image_id.clone(), scene.width, scene.height).with_objects(objects);
    (record, report)
}

/// One triplet per affordance, depth-first. Parts without affordances and
/// objects without parts have no flat representation and are dropped.
pub fn flatten(r: &SceneRecord) -> Vec<TripletRecord> {
    r.objects
        .iter()
        .flat_map(|o| {
            o.parts.iter().flat_map(move |p| {
                p.affordances.iter().map(move |a| TripletRecord {
                    object: o.name.clone(),
                    object_box: o.bbox,
                    part: p.name.clone(),
                    part_box: p.bbox,
                    action: a.action.clone(),
                    affordance_point: a.point,
                })
            })
        })
        .collect()
}

pub fn flatten_scene(r: &SceneRecord) -> FlatScene {
    FlatScene {
        image_id: r.image_id.clone(),
        width: r.width,
        height: r.height,
        triplets: flatten(r),
    }
}

/// Reads one flat document: `{"triplets": [...]}` with optional `image_id`,
/// `width` and `height`. Boxes and points may be plain numbers or coordinate
/// tokens; tokens need an image size, taken from the document or from
/// `default_size`.
pub fn parse_flat_document(
    text: &str,
    default_size: Option<(u32, u32)>,
) -> Result<FlatScene, ParseError> {
    let root = json::parse_strict(text)?;
    flat_from_value(&root, default_size)
}

pub fn flat_from_value(
    root: &Value,
    default_size: Option<(u32, u32)>,
) -> Result<FlatScene, ParseError> {
    let members = root
        .as_object()
        .ok_or_else(|| ParseError::new(root.offset, "SCHEMA", "flat document must be an object"))?;
    for m in members {
        if !matches!(m.key.as_str(), "image_id" | "width" | "height" | "triplets") {
            return Err(ParseError::new(
                m.key_offset,
                "UNKNOWN_KEY",
                format!("unexpected key {:?}", m.key),
            ));
        }
    }
    let image_id = match root.get("image_id") {
        None => String::new(),
        Some(v) => v
            .as_str()
            .ok_or_else(|| ParseError::new(v.offset, "SCHEMA", "image_id must be a string"))?
            .to_string(),
    };
    let dim = |key: &str| -> Result<Option<u32>, ParseError> {
        match root.get(key) {
            None => Ok(None),
            Some(v) => v
                .as_f64()
                .filter(|n| n.fract() == 0.0 && *n >= 1.0 && *n <= f64::from(u32::MAX))
                .map(|n| Some(n as u32))
                .ok_or_else(|| {
                    ParseError::new(
                        v.offset,
                        "SCHEMA",
                        format!("{key} must be a positive integer"),
                    )
                }),
        }
    };
    let size = match (dim("width")?, dim("height")?) {
        (Some(w), Some(h)) => Some((w, h)),
        (None, None) => default_size,
        _ => {
            return Err(ParseError::new(
                root.offset,
                "SCHEMA",
                "width and height must be given together",
            ))
        }
    };
    let list = root
        .get("triplets")
        .ok_or_else(|| ParseError::new(root.offset, "SCHEMA", "missing \"triplets\""))?;
    let items = list
        .as_array()
        .ok_or_else(|| ParseError::new(list.offset, "SCHEMA", "\"triplets\" must be an array"))?;

    let mut triplets = Vec::with_capacity(items.len());
    for item in items {
        triplets.push(triplet_from_value(item, size)?);
    }
    let (width, height) = size.unwrap_or((0, 0));
    Ok(FlatScene {
        image_id,
        width,
        height,
        triplets,
    })
}

const TRIPLET_KEYS: [&str; 6] = [
    "object",
    "object_box",
    "part",
    "part_box",
    "action",
    "affordance_point",
];

fn triplet_from_value(v: &Value, size: Option<(u32, u32)>) -> Result<TripletRecord, ParseError> {
    let members = v
        .as_object()
        .ok_or_else(|| ParseError::new(v.offset, "SCHEMA", "triplet must be an object"))?;
    for m in members {
        if !TRIPLET_KEYS.contains(&m.key.as_str()) {
            return Err(ParseError::new(
                m.key_offset,
                "UNKNOWN_KEY",
                format!("unexpected triplet key {:?}", m.key),
            ));
        }
    }
    let field = |key: &str| {
        v.get(key).ok_or_else(|| {
            ParseError::new(v.offset, "SCHEMA", format!("triplet is missing {key:?}"))
        })
    };
    let label = |key: &str| -> Result<String, ParseError> {
        let f = field(key)?;
        let s = f.as_str().ok_or_else(|| {
            ParseError::new(f.offset, "SCHEMA", format!("{key} must be a string"))
        })?;
        if normalize_label(s).is_empty() {
            return Err(ParseError::new(
                f.offset,
                "SCHEMA",
                format!("{key} is empty"),
            ));
        }
        Ok(s.to_string())
    };
    Ok(TripletRecord {
        object: label("object")?,
        object_box: read_box(field("object_box")?, size)?,
        part: label("part")?,
        part_box: read_box(field("part_box")?, size)?,
        action: label("action")?,
        affordance_point: read_point(field("affordance_point")?, size)?,
    })
}

fn numbers<const N: usize>(v: &Value) -> Option<[f64; N]> {
    let items = v.as_array()?;
    if items.len() != N {
        return None;
    }
    let mut out = [0.0; N];
    for (slot, item) in out.iter_mut().zip(items) {
        *slot = item.as_f64()?;
    }
    Some(out)
}

fn token_size(v: &Value, size: Option<(u32, u32)>) -> Result<(f64, f64), ParseError> {
    size.map(|(w, h)| (f64::from(w), f64::from(h)))
        .ok_or_else(|| {
            ParseError::new(
                v.offset,
                "MISSING_SIZE",
                "coordinate tokens need the image width and height",
            )
        })
}

fn read_box(v: &Value, size: Option<(u32, u32)>) -> Result<BBox, ParseError> {
    if let Some(s) = v.as_str() {
        let (w, h) = token_size(v, size)?;
        return decode_box(s, w, h, TokenSyntax::Relaxed)
            .map_err(|m| ParseError::new(v.offset, "SCHEMA", m));
    }
    numbers::<4>(v).map(BBox::from).ok_or_else(|| {
        ParseError::new(
            v.offset,
            "SCHEMA",
            "box must be 4 numbers or a token string",
        )
    })
}

fn read_point(v: &Value, size: Option<(u32, u32)>) -> Result<Point, ParseError> {
    if let Some(s) = v.as_str() {
        let (w, h) = token_size(v, size)?;
        return decode_point(s, w, h, TokenSyntax::Relaxed)
            .map_err(|m| ParseError::new(v.offset, "SCHEMA", m));
    }
    numbers::<2>(v).map(Point::from).ok_or_else(|| {
        ParseError::new(
            v.offset,
            "SCHEMA",
            "point must be 2 numbers or a token string",
        )
    })
}
