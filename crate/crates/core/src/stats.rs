//! Corpus statistics: entity counts, category vocabularies, hierarchy
//! density, composition frequencies and parse-eligibility.
//!
//! Placeholder nodes are skipped throughout.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{normalize_label, ObjectNode, PartNode, SceneRecord};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Composition {
    pub object: String,
    pub part: String,
    pub action: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionCount {
    #[serde(flatten)]
    pub composition: Composition,
    pub count: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EligibilityCounts {
    pub none: u64,
    pub parts_only: u64,
    pub affordances_only: u64,
    pub both: u64,
}

impl EligibilityCounts {
    pub fn eligible(&self) -> u64 {
        self.parts_only + self.affordances_only + self.both
    }
}

/// Normalized label → raw spellings, for labels seen in more than one form
/// or in a form that differs from the normalized one.
pub type VariantMap = BTreeMap<String, BTreeSet<String>>;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub objects: VariantMap,
    pub parts: VariantMap,
    pub actions: VariantMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub image_count: u64,
    pub object_count: u64,
    pub part_count: u64,
    pub affordance_count: u64,
    /// Affordances reached through a labeled part under a labeled object.
    pub chain_count: u64,
    pub distinct_objects: usize,
    pub distinct_parts: usize,
    pub distinct_actions: usize,
    pub parts_per_object: f64,
    pub affordances_per_part: f64,
    pub top_compositions: Vec<CompositionCount>,
    /// Total number of distinct compositions before top-k truncation.
    pub composition_kinds: usize,
    pub eligibility: EligibilityCounts,
    /// Raw-spelling variants of normalized labels.
    pub vocabulary: Vocabulary,
}

impl StatsReport {
    /// Nonzero when an affordance could not be traced to a labeled chain.
    pub fn chain_mismatch(&self) -> u64 {
        self.affordance_count - self.chain_count
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "images                 {}", self.image_count);
        let _ = writeln!(s, "objects                {}", self.object_count);
        let _ = writeln!(s, "parts                  {}", self.part_count);
        let _ = writeln!(s, "affordances            {}", self.affordance_count);
        let _ = writeln!(s, "chains                 {}", self.chain_count);
        let _ = writeln!(s, "object categories      {}", self.distinct_objects);
        let _ = writeln!(s, "part categories        {}", self.distinct_parts);
        let _ = writeln!(s, "action categories      {}", self.distinct_actions);
        let _ = writeln!(s, "parts / object         {:.3}", self.parts_per_object);
        let _ = writeln!(s, "affordances / part     {:.3}", self.affordances_per_part);
        let e = &self.eligibility;
        let _ = writeln!(
            s,
            "parse-eligible objects {} (parts only {}, affordances only {}, both {}; not eligible {})",
            e.eligible(),
            e.parts_only,
            e.affordances_only,
            e.both,
            e.none
        );
        let _ = writeln!(
            s,
            "top compositions ({} of {}):",
            self.top_compositions.len(),
            self.composition_kinds
        );
        for (i, c) in self.top_compositions.iter().enumerate() {
            let _ = writeln!(
                s,
                "{:>4}. {:>8}  {} / {} / {}",
                i + 1,
                c.count,
                c.composition.object,
                c.composition.part,
                c.composition.action
            );
        }
        s
    }
}

#[derive(Default)]
struct Partial {
    images: u64,
    objects: u64,
    parts: u64,
    affordances: u64,
    chains: u64,
    compositions: HashMap<Composition, u64>,
    eligibility: EligibilityCounts,
    raw: [HashMap<String, BTreeSet<String>>; 3],
}

impl Partial {
    fn add_label(&mut self, kind: usize, raw: &str) -> String {
        let norm = normalize_label(raw);
        self.raw[kind]
            .entry(norm.clone())
            .or_default()
            .insert(raw.to_string());
        norm
    }

    fn record(mut self, r: &SceneRecord) -> Self {
        self.images += 1;
        for obj in &r.objects {
            self.object(obj);
        }
        self
    }

    fn object(&mut self, obj: &ObjectNode) {
        self.objects += 1;
        let oname = self.add_label(0, &obj.name);
        let real_parts: Vec<&PartNode> = obj.parts.iter().filter(|p| !p.is_placeholder()).collect();
        let mut any_affordance = false;
        for part in &real_parts {
            self.parts += 1;
            let pname = self.add_label(1, &part.name);
            for aff in part.affordances.iter().filter(|a| !a.is_placeholder()) {
                any_affordance = true;
                self.affordances += 1;
                let action = self.add_label(2, &aff.action);
                if !oname.is_empty() && !pname.is_empty() && !action.is_empty() {
                    self.chains += 1;
                }
                *self
                    .compositions
                    .entry(Composition {
                        object: oname.clone(),
                        part: pname.clone(),
                        action,
                    })
                    .or_default() += 1;
            }
        }
        let e = &mut self.eligibility;
        match (!real_parts.is_empty(), any_affordance) {
            (false, false) => e.none += 1,
            (true, false) => e.parts_only += 1,
            (false, true) => e.affordances_only += 1,
            (true, true) => e.both += 1,
        }
    }

    fn merge(mut self, other: Partial) -> Self {
        self.images += other.images;
        self.objects += other.objects;
        self.parts += other.parts;
        self.affordances += other.affordances;
        self.chains += other.chains;
        for (k, v) in other.compositions {
            *self.compositions.entry(k).or_default() += v;
        }
        self.eligibility.none += other.eligibility.none;
        self.eligibility.parts_only += other.eligibility.parts_only;
        self.eligibility.affordances_only += other.eligibility.affordances_only;
        self.eligibility.both += other.eligibility.both;
        for (mine, theirs) in self.raw.iter_mut().zip(other.raw) {
            for (k, v) in theirs {
                mine.entry(k).or_default().extend(v);
            }
        }
        self
    }
}

fn variants(m: &HashMap<String, BTreeSet<String>>) -> VariantMap {
    m.iter()
        .filter(|(norm, raws)| raws.len() > 1 || raws.iter().any(|r| r != *norm))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect()
}

fn mean(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Single pass over the corpus (map-reduce across records).
pub fn corpus_stats(records: &[SceneRecord], top_k: usize) -> StatsReport {
    let p = records
        .par_iter()
        .fold(Partial::default, Partial::record)
        .reduce(Partial::default, Partial::merge);

    let mut comps: Vec<CompositionCount> = p
        .compositions
        .into_iter()
        .map(|(composition, count)| CompositionCount { composition, count })
        .collect();
    comps.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then_with(|| a.composition.cmp(&b.composition))
    });
    let composition_kinds = comps.len();
    comps.truncate(top_k);

    let distinct =
        |m: &HashMap<String, BTreeSet<String>>| m.keys().filter(|k| !k.is_empty()).count();
    StatsReport {
        image_count: p.images,
        object_count: p.objects,
        part_count: p.parts,
        affordance_count: p.affordances,
        chain_count: p.chains,
        distinct_objects: distinct(&p.raw[0]),
        distinct_parts: distinct(&p.raw[1]),
        distinct_actions: distinct(&p.raw[2]),
        parts_per_object: mean(p.parts, p.objects),
        affordances_per_part: mean(p.affordances, p.parts),
        top_compositions: comps,
        composition_kinds,
        eligibility: p.eligibility,
        vocabulary: Vocabulary {
            objects: variants(&p.raw[0]),
            parts: variants(&p.raw[1]),
            actions: variants(&p.raw[2]),
        },
    }
}
