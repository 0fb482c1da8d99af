use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use scenetree::curriculum::{default_stages, sample_epoch, CurriculumStage};
use serde::Deserialize;

use crate::io::write_items;

pub struct Args {
    pub nonpseudo: PathBuf,
    pub pseudo: PathBuf,
    pub stage: u8,
    pub n: usize,
    pub seed: u64,
    pub epoch: Option<u32>,
    pub stages_config: Option<PathBuf>,
    pub out: PathBuf,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StagesFile {
    stages: Vec<CurriculumStage>,
}

/// Plain id-per-line files, or dataset JSONL from which `image_id` is taken.
fn read_ids(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut ids = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('{') {
            let v: serde_json::Value = serde_json::from_str(line)
                .with_context(|| format!("{}: line {}", path.display(), i + 1))?;
            let id = v
                .get("image_id")
                .and_then(|x| x.as_str())
                .ok_or_else(|| anyhow!("{}: line {}: no string image_id", path.display(), i + 1))?;
            ids.push(id.to_string());
        } else {
            ids.push(line.to_string());
        }
    }
    Ok(ids)
}

fn load_stages(path: Option<&Path>) -> Result<Vec<CurriculumStage>> {
    let Some(path) = path else {
        return Ok(default_stages());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: StagesFile =
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    for s in &file.stages {
        s.check()?;
    }
    Ok(file.stages)
}

pub fn run(args: &Args) -> Result<bool> {
    let stages = load_stages(args.stages_config.as_deref())?;
    let stage = stages
        .iter()
        .find(|s| s.stage_id == args.stage)
        .ok_or_else(|| anyhow!("no stage {} in the stage table", args.stage))?;
    let epochs: Vec<u32> = match args.epoch {
        Some(e) if e >= stage.epochs => bail!(
            "stage {} has {} epochs; --epoch counts from 0",
            stage.stage_id,
            stage.epochs
        ),
        Some(e) => vec![e],
        None => (0..stage.epochs).collect(),
    };
    let nonpseudo = read_ids(&args.nonpseudo)?;
    let pseudo = read_ids(&args.pseudo)?;

    let manifests = epochs
        .iter()
        .map(|&e| sample_epoch(&nonpseudo, &pseudo, stage, e, args.seed, args.n))
        .collect::<Result<Vec<_>, _>>()?;
    write_items(&args.out, &manifests)?;
    println!("stage  epoch  entries  pseudo");
    for m in &manifests {
        println!(
            "{:>5}  {:>5}  {:>7}  {:>6}",
            m.stage_id,
            m.epoch,
            m.entries.len(),
            m.pseudo_count()
        );
    }
    Ok(true)
}
