use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use scenetree::serialization::{read_jsonl, write_jsonl, BadLinePolicy};
use scenetree::SceneRecord;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Reads a JSONL file, failing on the first malformed line.
pub fn read_all<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let out = read_jsonl(path, BadLinePolicy::Abort)
        .with_context(|| format!("reading {}", path.display()))?;
    Ok(out.items)
}

/// Writes records sorted by image id so reruns are byte-identical.
pub fn write_records(path: &Path, mut records: Vec<SceneRecord>) -> Result<()> {
    records.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    write_items(path, &records)
}

pub fn write_items<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    write_jsonl(items.iter(), path).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Table written beside a JSON report: `report.json` -> `report.txt`.
pub fn table_path(json: &Path) -> PathBuf {
    json.with_extension("txt")
}

/// Writes the JSON report and its table, and prints the table.
pub fn emit_report<T: Serialize>(path: &Path, value: &T, table: &str) -> Result<()> {
    write_json(path, value)?;
    write_text(&table_path(path), table)?;
    print!("{table}");
    Ok(())
}
