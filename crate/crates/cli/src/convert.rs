use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use log::warn;
use scenetree::flat::{flat_from_value, flatten_scene, to_hierarchy, FlatScene};
use scenetree::serialization::json;
use scenetree::{strip_placeholders, SceneRecord};
use serde::Serialize;

use crate::io::{read_all, table_path, write_items, write_json, write_records, write_text};

#[derive(Serialize)]
struct DocumentReport {
    image_id: String,
    triplets: usize,
    objects: usize,
    /// Indices of triplets that repeated an earlier affordance.
    dropped_duplicates: Vec<usize>,
}

/// Accepts one (possibly pretty-printed) flat document or JSONL with one
/// document per line.
fn read_flat(path: &Path, size: Option<(u32, u32)>) -> Result<Vec<FlatScene>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let whole = json::parse_strict(&text);
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l))
        .collect();
    match whole {
        Ok(v) => {
            let doc = flat_from_value(&v, size).with_context(|| format!("{}", path.display()))?;
            Ok(vec![doc])
        }
        Err(e) if lines.len() <= 1 => {
            Err(anyhow::Error::new(e).context(path.display().to_string()))
        }
        Err(_) => lines
            .into_iter()
            .map(|(n, l)| {
                json::parse_strict(l)
                    .and_then(|v| flat_from_value(&v, size))
                    .with_context(|| format!("{}: line {n}", path.display()))
            })
            .collect(),
    }
}

pub fn convert(
    input: &Path,
    out: &Path,
    size: Option<(u32, u32)>,
    report: Option<&Path>,
) -> Result<bool> {
    let docs = read_flat(input, size)?;
    let single = docs.len() == 1;
    let mut records = Vec::with_capacity(docs.len());
    let mut reports = Vec::with_capacity(docs.len());
    for (i, mut doc) in docs.into_iter().enumerate() {
        if doc.width == 0 || doc.height == 0 {
            bail!(
                "document {} has no image size; pass --width and --height",
                if doc.image_id.is_empty() {
                    format!("#{}", i + 1)
                } else {
                    format!("{:?}", doc.image_id)
                }
            );
        }
        if doc.image_id.is_empty() && single {
            doc.image_id = input
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
        }
        let (rec, conv) = to_hierarchy(&doc);
        for &t in &conv.dropped_duplicates {
            warn!(
                "{:?}: triplet {t} repeats an earlier affordance; dropped",
                doc.image_id
            );
        }
        reports.push(DocumentReport {
            image_id: rec.image_id.clone(),
            triplets: doc.triplets.len(),
            objects: rec.objects.len(),
            dropped_duplicates: conv.dropped_duplicates,
        });
        records.push(rec);
    }
    write_records(out, records)?;

    reports.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    let dropped: usize = reports.iter().map(|r| r.dropped_duplicates.len()).sum();
    let table = format!(
        "documents           {}\nobjects             {}\nduplicates dropped  {}\n",
        reports.len(),
        reports.iter().map(|r| r.objects).sum::<usize>(),
        dropped
    );
    if let Some(path) = report {
        write_json(path, &reports)?;
        write_text(&table_path(path), &table)?;
    }
    print!("{table}");
    Ok(true)
}

pub fn flatten(input: &Path, out: &Path) -> Result<bool> {
    let mut records: Vec<SceneRecord> = read_all(input)?;
    records.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    let mut flats = Vec::with_capacity(records.len());
    for r in &records {
        let r = strip_placeholders(r);
        let flat = flatten_scene(&r);
        let partial = r
            .objects
            .iter()
            .filter(|o| o.parts.is_empty() || o.parts.iter().any(|p| p.affordances.is_empty()))
            .count();
        if partial > 0 {
            warn!(
                "{:?}: {partial} objects have levels without children and lose them when flattened",
                r.image_id
            );
        }
        flats.push(flat);
    }
    write_items(out, &flats)?;
    println!(
        "records   {}\ntriplets  {}",
        flats.len(),
        flats.iter().map(|f| f.triplets.len()).sum::<usize>()
    );
    Ok(true)
}
