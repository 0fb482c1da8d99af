//! Shared generators for integration tests. Coordinates are integers so IoU
//! ties are exact and reproducible across implementations.
#![allow(dead_code)]

pub mod oracle;

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scenetree::{
    Affordance, BBox, ObjectNode, PartNode, Point, SceneRecord, PLACEHOLDER_ACTION,
    PLACEHOLDER_PART,
};

pub const OBJECTS: &[&str] = &["cup", "mug", "drawer", "microwave", "cabinet"];
pub const PARTS: &[&str] = &["handle", "door", "knob", "button panel"];
pub const ACTIONS: &[&str] = &["open", "pull", "press", "grasp"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_objects: usize,
    pub max_parts: usize,
    pub max_affordances: usize,
    /// Every object gets ≥1 part and every part ≥1 affordance.
    pub full_depth: bool,
    /// Probability that an affordance carries its own box.
    pub affordance_box_p: f64,
}

impl Default for Shape {
    fn default() -> Self {
        Self {
            max_objects: 5,
            max_parts: 3,
            max_affordances: 3,
            full_depth: false,
            affordance_box_p: 0.5,
        }
    }
}

fn pick<'a, R: Rng>(r: &mut R, xs: &'a [&'a str]) -> &'a str {
    xs[r.random_range(0..xs.len())]
}

/// Random spelling variant that normalizes back to `s`.
pub fn respell<R: Rng>(r: &mut R, s: &str) -> String {
    match r.random_range(0..4) {
        0 => s.to_uppercase(),
        1 => format!("  {s} "),
        2 => s.replace(' ', "   "),
        _ => s.to_string(),
    }
}

/// Integer box with positive area inside `outer`.
pub fn inner_box<R: Rng>(r: &mut R, outer: &BBox) -> BBox {
    let (x1, y1, x2, y2) = (
        outer.x1 as i64,
        outer.y1 as i64,
        outer.x2 as i64,
        outer.y2 as i64,
    );
    let ax = r.random_range(x1..x2);
    let bx = r.random_range(ax + 1..=x2);
    let ay = r.random_range(y1..y2);
    let by = r.random_range(ay + 1..=y2);
    BBox::new(ax as f64, ay as f64, bx as f64, by as f64)
}

/// Placeholder-free scene with points at the center of their valid region.
pub fn scene<R: Rng>(r: &mut R, id: &str, shape: Shape) -> SceneRecord {
    let w = r.random_range(64..=640u32);
    let h = r.random_range(64..=640u32);
    let image = BBox::new(0.0, 0.0, f64::from(w), f64::from(h));
    let lo = usize::from(shape.full_depth);
    let mut objects = Vec::new();
    for _ in 0..r.random_range(lo..=shape.max_objects.max(lo)) {
        let obox = inner_box(r, &image);
        let mut parts = Vec::new();
        for _ in 0..r.random_range(lo..=shape.max_parts.max(lo)) {
            let pbox = inner_box(r, &obox);
            let mut affs = Vec::new();
            for _ in 0..r.random_range(lo..=shape.max_affordances.max(lo)) {
                let action = pick(r, ACTIONS);
                let aff = if r.random_bool(shape.affordance_box_p) {
                    let abox = inner_box(r, &pbox);
                    Affordance::new(action, abox.center()).with_box(abox)
                } else {
                    Affordance::new(action, pbox.center())
                };
                affs.push(aff);
            }
            parts.push(PartNode::new(pick(r, PARTS), pbox).with_affordances(affs));
        }
        objects.push(ObjectNode::new(pick(r, OBJECTS), obox).with_parts(parts));
    }
    SceneRecord::new(id, w, h).with_objects(objects)
}

pub fn corpus(seed: u64, n: usize, shape: Shape) -> Vec<SceneRecord> {
    let mut r = rng(seed);
    (0..n)
        .map(|i| scene(&mut r, &format!("img{i:05}"), shape))
        .collect()
}

fn jitter<R: Rng>(r: &mut R, b: &BBox, w: u32, h: u32, amount: i64) -> BBox {
    let mut d = || r.random_range(-amount..=amount) as f64;
    let x1 = (b.x1 + d()).clamp(0.0, f64::from(w) - 1.0);
    let y1 = (b.y1 + d()).clamp(0.0, f64::from(h) - 1.0);
    let x2 = (b.x2 + d()).clamp(x1 + 1.0, f64::from(w));
    let y2 = (b.y2 + d()).clamp(y1 + 1.0, f64::from(h));
    BBox::new(x1, y1, x2, y2)
}

fn maybe_rename<R: Rng>(r: &mut R, name: &str, pool: &[&str], p: f64) -> String {
    if r.random_bool(p) {
        pick(r, pool).to_string()
    } else {
        respell(r, name)
    }
}

/// A plausible noisy prediction for `gt`: jittered boxes, relabels,
/// respellings, drops, duplicates, spurious entries and reordering.
pub fn perturb<R: Rng>(r: &mut R, gt: &SceneRecord) -> SceneRecord {
    let (w, h) = (gt.width, gt.height);
    let image = BBox::new(0.0, 0.0, f64::from(w), f64::from(h));
    let amount = r.random_range(0..=12);
    let mut objects = Vec::new();
    for o in &gt.objects {
        if r.random_bool(0.15) {
            continue;
        }
        let obox = jitter(r, &o.bbox, w, h, amount);
        let mut parts = Vec::new();
        for p in &o.parts {
            if r.random_bool(0.15) {
                continue;
            }
            let pbox = jitter(r, &p.bbox, w, h, amount);
            let mut affs = Vec::new();
            for a in &p.affordances {
                if r.random_bool(0.15) {
                    continue;
                }
                let point = if r.random_bool(0.25) {
                    Point::new(r.random_range(0..=w) as f64, r.random_range(0..=h) as f64)
                } else {
                    a.point
                };
                let action = maybe_rename(r, &a.action, ACTIONS, 0.15);
                affs.push(Affordance::new(action, point));
                if r.random_bool(0.1) {
                    affs.push(Affordance::new(a.action.clone(), a.point));
                }
            }
            if r.random_bool(0.2) {
                affs.shuffle(r);
            }
            parts.push(
                PartNode::new(maybe_rename(r, &p.name, PARTS, 0.15), pbox).with_affordances(affs),
            );
        }
        if r.random_bool(0.15) {
            parts.push(PartNode::new(pick(r, PARTS), inner_box(r, &obox)));
        }
        let obj = ObjectNode::new(maybe_rename(r, &o.name, OBJECTS, 0.15), obox).with_parts(parts);
        if r.random_bool(0.15) {
            // Same name and box, different children: an exact IoU tie whose
            // resolution changes the lower levels.
            let mut twin = obj.clone();
            let keep = r.random_range(0..=twin.parts.len());
            twin.parts.truncate(keep);
            for p in &mut twin.parts {
                p.bbox = jitter(r, &p.bbox, w, h, 3);
            }
            objects.push(twin);
        }
        objects.push(obj);
    }
    if r.random_bool(0.3) {
        let extra = ObjectNode::new(pick(r, OBJECTS), inner_box(r, &image));
        objects.push(extra);
    }
    if r.random_bool(0.3) {
        objects.shuffle(r);
    }
    SceneRecord::new(gt.image_id.clone(), w, h).with_objects(objects)
}

/// Adds ground-truth twins: objects repeated with the same name and box but
/// freshly drawn parts.
pub fn with_twins<R: Rng>(r: &mut R, rec: &SceneRecord) -> SceneRecord {
    let mut out = rec.clone();
    let n = out.objects.len();
    for i in 0..n {
        if r.random_bool(0.2) {
            let o = &out.objects[i];
            let mut twin = ObjectNode::new(o.name.clone(), o.bbox);
            for _ in 0..r.random_range(0..=2) {
                let pbox = inner_box(r, &o.bbox);
                let aff = Affordance::new(pick(r, ACTIONS), pbox.center());
                twin.parts
                    .push(PartNode::new(pick(r, PARTS), pbox).with_affordances(vec![aff]));
            }
            let at = r.random_range(0..=out.objects.len());
            out.objects.insert(at, twin);
        }
    }
    out
}

/// Either a perturbed copy of `gt` or an unrelated scene of the same size.
pub fn prediction_for<R: Rng>(r: &mut R, gt: &SceneRecord, shape: Shape) -> SceneRecord {
    if r.random_bool(0.85) {
        perturb(r, gt)
    } else {
        let mut p = scene(r, &gt.image_id, shape);
        p.width = gt.width;
        p.height = gt.height;
        let image = BBox::new(0.0, 0.0, f64::from(gt.width), f64::from(gt.height));
        for o in &mut p.objects {
            if !image.contains_box(&o.bbox) {
                o.bbox = inner_box(r, &image);
                o.parts.clear();
            }
        }
        p
    }
}

/// Sprinkles placeholder parts and affordances over a record.
pub fn with_placeholders<R: Rng>(r: &mut R, rec: &SceneRecord) -> SceneRecord {
    let mut out = rec.clone();
    for o in &mut out.objects {
        if r.random_bool(0.3) {
            let at = r.random_range(0..=o.parts.len());
            let mut ph = PartNode::new(PLACEHOLDER_PART, o.bbox);
            ph.affordances
                .push(Affordance::new(PLACEHOLDER_ACTION, o.bbox.center()));
            o.parts.insert(at, ph);
        }
        for p in &mut o.parts {
            if !p.is_placeholder() && r.random_bool(0.3) {
                let at = r.random_range(0..=p.affordances.len());
                p.affordances
                    .insert(at, Affordance::placeholder(p.bbox.center()));
            }
        }
    }
    out
}

/// Removes objects, parts and affordances that would collide under flat
/// grouping (same normalized name and box, or same action and point).
pub fn dedup_flat_keys(rec: &mut SceneRecord) {
    let key = |s: &str, b: &BBox| {
        (
            scenetree::normalize_label(s),
            [b.x1, b.y1, b.x2, b.y2].map(f64::to_bits),
        )
    };
    let mut seen_o = HashSet::new();
    rec.objects.retain(|o| seen_o.insert(key(&o.name, &o.bbox)));
    for o in &mut rec.objects {
        let mut seen_p = HashSet::new();
        o.parts.retain(|p| seen_p.insert(key(&p.name, &p.bbox)));
        for p in &mut o.parts {
            let mut seen_a = HashSet::new();
            p.affordances.retain(|a| {
                seen_a.insert((
                    scenetree::normalize_label(&a.action),
                    [a.point.x.to_bits(), a.point.y.to_bits()],
                ))
            });
        }
    }
}

/// Noisy annotation-engine output: parts spilling out of their object,
/// points outside parts, and near-duplicate siblings.
pub fn noisy_scene<R: Rng>(r: &mut R, id: &str) -> SceneRecord {
    let mut rec = scene(r, id, Shape::default());
    let (w, h) = (rec.width, rec.height);
    let image = BBox::new(0.0, 0.0, f64::from(w), f64::from(h));
    for o in &mut rec.objects {
        for p in &mut o.parts {
            if r.random_bool(0.2) {
                p.bbox = inner_box(r, &image);
            }
            for a in &mut p.affordances {
                if r.random_bool(0.2) {
                    a.point =
                        Point::new(r.random_range(0..=w) as f64, r.random_range(0..=h) as f64);
                }
            }
        }
        if r.random_bool(0.25) && !o.parts.is_empty() {
            let i = r.random_range(0..o.parts.len());
            let mut dup = o.parts[i].clone();
            dup.bbox = jitter(r, &dup.bbox, w, h, 1);
            dup.name = respell(r, &dup.name);
            o.parts.push(dup);
        }
    }
    if r.random_bool(0.25) && !rec.objects.is_empty() {
        let i = r.random_range(0..rec.objects.len());
        let dup = rec.objects[i].clone();
        rec.objects.push(dup);
    }
    rec
}
