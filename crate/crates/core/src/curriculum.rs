//! Structural-completion pseudo labels and the staged curriculum sampler.
//!
//! The sampler produces per-epoch manifests that mix the non-pseudo pool
//! (records with their natural, possibly partial, hierarchies) with the
//! pseudo pool (placeholder-completed records) at each stage's ratio.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::SamplerError;
use crate::model::{Affordance, PartNode, SceneRecord, PLACEHOLDER_PART};

/// Completes every object to full depth with placeholder nodes.
///
/// Objects without parts receive a placeholder part spanning the object box;
/// parts without affordances (including new placeholders) receive a
/// placeholder affordance at the part-box center. Idempotent.
pub fn pseudo_complete(r: &SceneRecord) -> SceneRecord {
    let mut out = r.clone();
    for obj in &mut out.objects {
        if obj.parts.is_empty() {
            obj.parts.push(PartNode::new(PLACEHOLDER_PART, obj.bbox));
        }
        for part in &mut obj.parts {
            if part.affordances.is_empty() {
                part.affordances
                    .push(Affordance::placeholder(part.bbox.center()));
            }
        }
    }
    out
}

/// True when `r` has no object without parts and no part without affordances.
pub fn is_full_depth(r: &SceneRecord) -> bool {
    r.objects
        .iter()
        .all(|o| !o.parts.is_empty() && o.parts.iter().all(|p| !p.affordances.is_empty()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurriculumStage {
    pub stage_id: u8,
    pub pseudo_fraction: f64,
    pub epochs: u32,
    /// Learning rates are carried as manifest metadata only.
    pub main_lr: f64,
    pub vision_lr: f64,
}

impl CurriculumStage {
    pub fn check(&self) -> Result<(), SamplerError> {
        if !(0.0..=1.0).contains(&self.pseudo_fraction) {
            return Err(SamplerError::Stage(format!(
                "stage {} pseudo_fraction {} outside [0, 1]",
                self.stage_id, self.pseudo_fraction
            )));
        }
        if self.epochs < 1 {
            return Err(SamplerError::Stage(format!(
                "stage {} has no epochs",
                self.stage_id
            )));
        }
        Ok(())
    }

    /// Pseudo entries in a manifest of `n`, rounded half up.
    pub fn pseudo_count(&self, n: usize) -> usize {
        ((n as f64 * self.pseudo_fraction) + 0.5).floor() as usize
    }
}

/// The three-stage schedule: pure non-pseudo, then 30% and 50% pseudo.
pub fn default_stages() -> Vec<CurriculumStage> {
    vec![
        CurriculumStage {
            stage_id: 1,
            pseudo_fraction: 0.0,
            epochs: 3,
            main_lr: 2e-5,
            vision_lr: 2e-6,
        },
        CurriculumStage {
            stage_id: 2,
            pseudo_fraction: 0.3,
            epochs: 4,
            main_lr: 1e-5,
            vision_lr: 1e-6,
        },
        CurriculumStage {
            stage_id: 3,
            pseudo_fraction: 0.5,
            epochs: 3,
            main_lr: 6e-6,
            vision_lr: 6e-7,
        },
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pool {
    Nonpseudo,
    Pseudo,
}

impl Pool {
    fn name(self) -> &'static str {
        match self {
            Pool::Nonpseudo => "nonpseudo",
            Pool::Pseudo => "pseudo",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub pool: Pool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleManifest {
    #[serde(rename = "stage")]
    pub stage_id: u8,
    pub epoch: u32,
    pub seed: u64,
    pub entries: Vec<ManifestEntry>,
}

impl SampleManifest {
    pub fn pseudo_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.pool == Pool::Pseudo)
            .count()
    }
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Stable RNG seed for one shuffle, independent of platform and hasher.
fn stream_seed(seed: u64, stage: u8, epoch: u32, stream: &str, round: u64) -> u64 {
    [u64::from(stage), u64::from(epoch), fnv1a(stream), round]
        .into_iter()
        .fold(mix(seed), |acc, part| mix(acc ^ part))
}

fn draw(ids: &[String], k: usize, seed: u64, stage: u8, epoch: u32, pool: Pool) -> Vec<String> {
    let mut out = Vec::with_capacity(k);
    let mut round = 0u64;
    while out.len() < k {
        let mut order: Vec<&String> = ids.iter().collect();
        let mut rng =
            ChaCha8Rng::seed_from_u64(stream_seed(seed, stage, epoch, pool.name(), round));
        order.shuffle(&mut rng);
        let take = (k - out.len()).min(order.len());
        out.extend(order.into_iter().take(take).cloned());
        round += 1;
    }
    out
}

/// Builds the manifest for one epoch of one stage.
///
/// Each pool is shuffled under a key derived from `(seed, stage, epoch,
/// pool)` and drawn without replacement, reshuffling with a fresh key each
/// time a pool is exhausted. The combined entries are shuffled once more.
pub fn sample_epoch(
    nonpseudo_ids: &[String],
    pseudo_ids: &[String],
    stage: &CurriculumStage,
    epoch: u32,
    seed: u64,
    n: usize,
) -> Result<SampleManifest, SamplerError> {
    stage.check()?;
    if n == 0 {
        return Err(SamplerError::EmptySample);
    }
    let k_pseudo = stage.pseudo_count(n);
    let k_nonpseudo = n - k_pseudo;
    for (pool, ids, needed) in [
        ("nonpseudo", nonpseudo_ids, k_nonpseudo),
        ("pseudo", pseudo_ids, k_pseudo),
    ] {
        if needed > 0 && ids.is_empty() {
            return Err(SamplerError::EmptyPool {
                pool,
                stage: stage.stage_id,
                needed,
            });
        }
    }

    let mut entries: Vec<ManifestEntry> = draw(
        nonpseudo_ids,
        k_nonpseudo,
        seed,
        stage.stage_id,
        epoch,
        Pool::Nonpseudo,
    )
    .into_iter()
    .map(|id| ManifestEntry {
        id,
        pool: Pool::Nonpseudo,
    })
    .chain(
        draw(
            pseudo_ids,
            k_pseudo,
            seed,
            stage.stage_id,
            epoch,
            Pool::Pseudo,
        )
        .into_iter()
        .map(|id| ManifestEntry {
            id,
            pool: Pool::Pseudo,
        }),
    )
    .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, stage.stage_id, epoch, "mix", 0));
    entries.shuffle(&mut rng);

    Ok(SampleManifest {
        stage_id: stage.stage_id,
        epoch,
        seed,
        entries,
    })
}
