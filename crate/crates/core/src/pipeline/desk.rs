//! The desk-scale reproduction: procedural digits, the small convolutional
//! network, datasets per attack and the three evaluation regimes.

use serde::{Deserialize, Serialize};

use super::dataset::{build_detection_dataset, BuildConfig, BuildSummary, DetectionDataset};
use super::experiment::{run_experiment, ExperimentConfig, ExperimentReport};
use super::hypothesis::{hypothesis_suite, HypothesisConfig, HypothesisRow};
use crate::attacks::AttackConfig;
use crate::benford::ExtractionConfig;
use crate::data::{self, Source};
use crate::error::{Error, Result};
use crate::net::{NetConfig, TinyNet, TrainConfig, TrainReport};
use crate::record::AttackId;
use crate::rng::derive_seed;
use crate::svm::SvmParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeskConfig {
    pub seed: u64,
    /// Images used to fit the network.
    pub net_images: usize,
    /// In-sample images for the detection datasets.
    pub detection_images: usize,
    /// Images from the shifted source for data transfer.
    pub shifted_images: usize,
    pub train: TrainConfig,
    pub attacks: Vec<AttackId>,
    pub data_transfer_attacks: Vec<AttackId>,
    pub extraction: ExtractionConfig,
    pub svm: SvmParams,
    /// `None` skips the hypothesis suite.
    pub hypotheses: Option<HypothesisConfig>,
}

impl Default for DeskConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            net_images: 3000,
            detection_images: 600,
            shifted_images: 600,
            train: TrainConfig { epochs: 20, lr: 0.02, batch_size: 32, momentum: 0.9, seed: 0 },
            attacks: vec![AttackId::Bim, AttackId::Rpgd],
            data_transfer_attacks: vec![AttackId::Bim],
            extraction: ExtractionConfig::default(),
            svm: SvmParams::default(),
            hypotheses: Some(HypothesisConfig::default()),
        }
    }
}

impl DeskConfig {
    pub fn validate(&self) -> Result<()> {
        if self.attacks.is_empty() {
            return Err(Error::InvalidConfig("at least one attack is required".into()));
        }
        if self.attacks.contains(&AttackId::None) || self.data_transfer_attacks.contains(&AttackId::None) {
            return Err(Error::InvalidConfig("`none` is not an attack".into()));
        }
        if self.net_images == 0 || self.detection_images == 0 {
            return Err(Error::InvalidConfig("image counts must be positive".into()));
        }
        if !self.data_transfer_attacks.is_empty() && self.shifted_images == 0 {
            return Err(Error::InvalidConfig("data transfer needs shifted images".into()));
        }
        Ok(())
    }
}

pub struct DeskArtifacts {
    pub net: TinyNet,
    pub train_report: TrainReport,
    /// Accuracy on the in-sample detection images.
    pub holdout_accuracy: f64,
    pub shifted_accuracy: Option<f64>,
    /// In-sample datasets first, in `attacks` order, then shifted ones.
    pub datasets: Vec<DetectionDataset>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetSummary {
    pub train_accuracy: f64,
    pub holdout_accuracy: f64,
    pub shifted_accuracy: Option<f64>,
    pub final_epoch_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeskReport {
    pub config: DeskConfig,
    pub net: NetSummary,
    pub datasets: Vec<BuildSummary>,
    pub experiments: Vec<ExperimentReport>,
    #[serde(default)]
    pub hypotheses: Vec<HypothesisRow>,
}

impl DeskReport {
    pub fn experiment(&self, train: AttackId, test: AttackId, test_source: &str) -> Option<&ExperimentReport> {
        self.experiments
            .iter()
            .find(|e| e.config.train_attack == train && e.config.test_attack == test && e.config.test_source == test_source)
    }
}

/// Generates the images, trains the network and builds every dataset.
pub fn prepare_desk(cfg: &DeskConfig) -> Result<DeskArtifacts> {
    cfg.validate()?;
    let seed = cfg.seed;
    let net_data = data::generate(Source::Desk, cfg.net_images, derive_seed(seed, 11));
    let detection = data::generate(Source::Desk, cfg.detection_images, derive_seed(seed, 12));
    let train = TrainConfig { seed: derive_seed(seed, 10), ..cfg.train };
    let mut net = TinyNet::init(NetConfig::desk(data::CLASSES), train.seed)?;
    let train_report = net.train(&net_data, &train)?;
    let holdout_accuracy = net.accuracy(&detection)?;

    let build_seed = derive_seed(seed, 20);
    let attack_seed = derive_seed(seed, 30);
    let build = |source: Source, images: &[crate::net::Example], attack: AttackId| -> Result<DetectionDataset> {
        let attack_cfg = AttackConfig::for_method(attack)?.with_seed(attack_seed);
        build_detection_dataset(images, &net, &BuildConfig::new(source.tag(), attack_cfg, build_seed))
    };
    let mut datasets = Vec::new();
    for &a in &cfg.attacks {
        datasets.push(build(Source::Desk, &detection, a)?);
    }
    let mut shifted_accuracy = None;
    if !cfg.data_transfer_attacks.is_empty() {
        let shifted = data::generate(Source::Shifted, cfg.shifted_images, derive_seed(seed, 13));
        shifted_accuracy = Some(net.accuracy(&shifted)?);
        for &a in &cfg.data_transfer_attacks {
            datasets.push(build(Source::Shifted, &shifted, a)?);
        }
    }
    Ok(DeskArtifacts { net, train_report, holdout_accuracy, shifted_accuracy, datasets })
}

/// Non-transfer per attack, attack transfer for every ordered pair and data
/// transfer (desk → shifted) for each data-transfer attack.
pub fn desk_experiments(cfg: &DeskConfig) -> Vec<ExperimentConfig> {
    let with = |mut e: ExperimentConfig| {
        e.extraction = cfg.extraction;
        e.svm = cfg.svm;
        e
    };
    let desk = Source::Desk.tag();
    let mut out = Vec::new();
    for &a in &cfg.attacks {
        out.push(with(ExperimentConfig::non_transfer(desk, a)));
    }
    for &a in &cfg.attacks {
        for &b in cfg.attacks.iter().filter(|&&b| b != a) {
            out.push(with(ExperimentConfig::attack_transfer(desk, a, b)));
        }
    }
    for &a in cfg.data_transfer_attacks.iter().filter(|a| cfg.attacks.contains(a)) {
        out.push(with(ExperimentConfig::data_transfer(desk, Source::Shifted.tag(), a)));
    }
    out
}

pub fn run_desk(cfg: &DeskConfig) -> Result<(DeskArtifacts, DeskReport)> {
    let artifacts = prepare_desk(cfg)?;
    let experiments = desk_experiments(cfg)
        .iter()
        .map(|e| run_experiment(e, &artifacts.datasets))
        .collect::<Result<Vec<_>>>()?;
    let hypotheses = match &cfg.hypotheses {
        Some(h) => hypothesis_suite(&artifacts.datasets, h)?,
        None => Vec::new(),
    };
    let report = DeskReport {
        config: cfg.clone(),
        net: NetSummary {
            train_accuracy: artifacts.train_report.train_accuracy,
            holdout_accuracy: artifacts.holdout_accuracy,
            shifted_accuracy: artifacts.shifted_accuracy,
            final_epoch_loss: artifacts.train_report.epoch_loss.last().copied(),
        },
        datasets: artifacts.datasets.iter().map(|d| d.summary.clone()).collect(),
        experiments,
        hypotheses,
    };
    Ok((artifacts, report))
}
