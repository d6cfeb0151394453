use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::attacks::{gaussian_noisy, l2_distance, run_attack, AttackConfig};
use crate::error::{Error, Result};
use crate::net::{Example, TinyNet};
use crate::par;
use crate::record::{ActivationRecord, AttackId, Group};
use crate::rng::{derive_seed, rng_from_seed};

const SPLIT_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    /// Provenance tag, e.g. `desk`.
    pub source: String,
    pub attack: AttackConfig,
    pub train_fraction: f64,
    pub min_success_rate: f64,
    /// Drives the split and the noise; the attack's own randomness comes
    /// from `attack.seed`.
    pub seed: u64,
}

impl BuildConfig {
    pub fn new(source: impl Into<String>, attack: AttackConfig, seed: u64) -> Self {
        Self { source: source.into(), attack, train_fraction: 0.8, min_success_rate: 0.1, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildSummary {
    pub source: String,
    pub attack: AttackId,
    pub images: usize,
    pub misclassified: usize,
    pub eligible: usize,
    pub attack_failures: usize,
    pub success_rate: f64,
    pub noisy_dropped: usize,
    pub kept_train: usize,
    pub kept_test: usize,
    /// Mean ℓ2 of the train-split adversarial perturbations.
    pub mean_adversarial_l2: f64,
    pub mean_noise_l2: f64,
    pub noise_sigma: f64,
}

impl BuildSummary {
    /// Summary for a dataset assembled from existing records rather than
    /// crafted here.
    pub fn external(source: &str, attack: AttackId) -> Self {
        Self {
            source: source.into(),
            attack,
            images: 0,
            misclassified: 0,
            eligible: 0,
            attack_failures: 0,
            success_rate: 0.0,
            noisy_dropped: 0,
            kept_train: 0,
            kept_test: 0,
            mean_adversarial_l2: 0.0,
            mean_noise_l2: 0.0,
            noise_sigma: 0.0,
        }
    }
}

/// Clean, noisy and adversarial records per kept image, with an 80/20
/// split by image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionDataset {
    pub source: String,
    pub attack: AttackId,
    /// Triples in image order: clean, noisy, adversarial.
    pub records: Vec<ActivationRecord>,
    pub train_ids: BTreeSet<u64>,
    pub test_ids: BTreeSet<u64>,
    pub summary: BuildSummary,
}

impl DetectionDataset {
    pub fn split_of(&self, sample_id: u64) -> Option<Split> {
        if self.train_ids.contains(&sample_id) {
            Some(Split::Train)
        } else if self.test_ids.contains(&sample_id) {
            Some(Split::Test)
        } else {
            None
        }
    }

    pub fn records_in(&self, split: Split) -> Vec<&ActivationRecord> {
        self.records.iter().filter(|r| self.split_of(r.sample_id) == Some(split)).collect()
    }

    pub fn records_of(&self, split: Option<Split>, group: Group) -> Vec<&ActivationRecord> {
        self.records
            .iter()
            .filter(|r| r.group == group && split.is_none_or(|s| self.split_of(r.sample_id) == Some(s)))
            .collect()
    }

    pub fn image_count(&self) -> usize {
        self.records.len() / 3
    }
}

struct Crafted {
    id: u64,
    clean: Vec<f64>,
    adversarial: Vec<f64>,
    label: usize,
}

/// Builds the detection set for one attack over `images`; image `i` gets
/// sample id `i`.
///
/// Misclassified images are skipped. The eligible images are split 80/20
/// before attacking, so datasets built with the same seed from the same
/// images and network share their split whatever the attack. Images whose
/// attack fails, or whose noisy copy is misclassified, contribute nothing.
pub fn build_detection_dataset(images: &[Example], net: &TinyNet, cfg: &BuildConfig) -> Result<DetectionDataset> {
    cfg.attack.validate()?;
    if images.is_empty() {
        return Err(Error::Empty("no images"));
    }
    if !(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0) {
        return Err(Error::InvalidParameter("train fraction must lie in (0, 1)".into()));
    }
    let predictions = par::map_slice(images, |ex| net.predict(&ex.input)).into_iter().collect::<Result<Vec<_>>>()?;
    let eligible: Vec<u64> = (0..images.len() as u64).filter(|&i| predictions[i as usize] == images[i as usize].label).collect();
    if eligible.is_empty() {
        return Err(Error::Precondition("no image is classified correctly".into()));
    }

    let mut order = eligible.clone();
    order.shuffle(&mut rng_from_seed(derive_seed(cfg.seed, SPLIT_STREAM)));
    let n_train = ((order.len() as f64) * cfg.train_fraction).round() as usize;
    let train_pool: BTreeSet<u64> = order[..n_train].iter().copied().collect();

    let outcomes = par::map_slice(&eligible, |&id| {
        let ex = &images[id as usize];
        run_attack(net, &ex.input, ex.label, &cfg.attack, id)
    });
    let mut crafted = Vec::new();
    for (&id, outcome) in eligible.iter().zip(outcomes) {
        let outcome = outcome?;
        if outcome.success {
            let ex = &images[id as usize];
            crafted.push(Crafted { id, clean: ex.input.clone(), adversarial: outcome.adversarial, label: ex.label });
        }
    }
    let success_rate = crafted.len() as f64 / eligible.len() as f64;
    if success_rate < cfg.min_success_rate {
        return Err(Error::LowAttackSuccess { rate: success_rate, min: cfg.min_success_rate });
    }

    let train_l2: Vec<f64> =
        crafted.iter().filter(|c| train_pool.contains(&c.id)).map(|c| l2_distance(&c.adversarial, &c.clean)).collect();
    if train_l2.is_empty() {
        return Err(Error::Precondition("no successful adversarial example in the train split".into()));
    }
    let mean_adversarial_l2 = train_l2.iter().sum::<f64>() / train_l2.len() as f64;
    let dim = net.input_len() as f64;
    let noise_sigma = mean_adversarial_l2 / dim.sqrt();
    let noise_seed = derive_seed(cfg.seed, NOISE_STREAM);

    let triples = par::map_slice(&crafted, |c| -> Result<Option<(Vec<ActivationRecord>, f64)>> {
        let noisy = gaussian_noisy(&c.clean, noise_sigma, derive_seed(noise_seed, c.id))?;
        if net.predict(&noisy)? != c.label {
            return Ok(None);
        }
        let class = u16::try_from(c.label).map_err(|_| Error::InvalidParameter("class index exceeds u16".into()))?;
        let mut out = Vec::with_capacity(3);
        for (group, attack, x) in [
            (Group::Clean, AttackId::None, &c.clean),
            (Group::Noisy, AttackId::None, &noisy),
            (Group::Adversarial, cfg.attack.method, &c.adversarial),
        ] {
            let (_, layers) = net.forward_with_responses(x)?;
            out.push(ActivationRecord::new(c.id, group, attack, class, layers)?);
        }
        Ok(Some((out, l2_distance(&noisy, &c.clean))))
    });

    let mut records = Vec::with_capacity(3 * crafted.len());
    let (mut train_ids, mut test_ids) = (BTreeSet::new(), BTreeSet::new());
    let mut noise_l2 = Vec::new();
    for (c, t) in crafted.iter().zip(triples) {
        if let Some((recs, l2)) = t? {
            records.extend(recs);
            noise_l2.push(l2);
            if train_pool.contains(&c.id) {
                train_ids.insert(c.id);
            } else {
                test_ids.insert(c.id);
            }
        }
    }
    let summary = BuildSummary {
        source: cfg.source.clone(),
        attack: cfg.attack.method,
        images: images.len(),
        misclassified: images.len() - eligible.len(),
        eligible: eligible.len(),
        attack_failures: eligible.len() - crafted.len(),
        success_rate,
        noisy_dropped: crafted.len() - noise_l2.len(),
        kept_train: train_ids.len(),
        kept_test: test_ids.len(),
        mean_adversarial_l2,
        mean_noise_l2: if noise_l2.is_empty() { 0.0 } else { noise_l2.iter().sum::<f64>() / noise_l2.len() as f64 },
        noise_sigma,
    };
    Ok(DetectionDataset { source: cfg.source.clone(), attack: cfg.attack.method, records, train_ids, test_ids, summary })
}
