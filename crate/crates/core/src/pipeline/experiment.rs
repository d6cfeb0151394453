use serde::{Deserialize, Serialize};

use super::dataset::{DetectionDataset, Split};
use crate::benford::{extract_batch, ExtractionConfig};
use crate::error::{Error, Result};
use crate::record::{ActivationRecord, AttackId};
use crate::svm::{evaluate, train_svm, EvalReport, SvmModel, SvmParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    NonTransfer,
    AttackTransfer,
    DataTransfer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub case: Case,
    pub train_attack: AttackId,
    pub test_attack: AttackId,
    pub train_source: String,
    pub test_source: String,
    pub extraction: ExtractionConfig,
    pub svm: SvmParams,
}

impl ExperimentConfig {
    pub fn non_transfer(source: &str, attack: AttackId) -> Self {
        Self::with_case(Case::NonTransfer, attack, attack, source, source)
    }

    pub fn attack_transfer(source: &str, train: AttackId, test: AttackId) -> Self {
        Self::with_case(Case::AttackTransfer, train, test, source, source)
    }

    pub fn data_transfer(train_source: &str, test_source: &str, attack: AttackId) -> Self {
        Self::with_case(Case::DataTransfer, attack, attack, train_source, test_source)
    }

    fn with_case(case: Case, train_attack: AttackId, test_attack: AttackId, train_source: &str, test_source: &str) -> Self {
        Self {
            case,
            train_attack,
            test_attack,
            train_source: train_source.into(),
            test_source: test_source.into(),
            extraction: ExtractionConfig::default(),
            svm: SvmParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.train_attack == AttackId::None || self.test_attack == AttackId::None {
            return Err(Error::InvalidConfig("train and test attacks must be real attacks".into()));
        }
        let same_attack = self.train_attack == self.test_attack;
        let same_source = self.train_source == self.test_source;
        let ok = match self.case {
            Case::NonTransfer => same_attack && same_source,
            Case::AttackTransfer => !same_attack && same_source,
            Case::DataTransfer => same_attack && !same_source,
        };
        if !ok {
            return Err(Error::InvalidConfig(format!(
                "{:?} needs {} attacks and {} sources; got {}→{} on {}→{}",
                self.case,
                if self.case == Case::AttackTransfer { "different" } else { "equal" },
                if self.case == Case::DataTransfer { "different" } else { "equal" },
                self.train_attack,
                self.test_attack,
                self.train_source,
                self.test_source
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub n_train: usize,
    pub n_test: usize,
    pub support_vectors: usize,
    /// Records with at least one zero-filled degenerate layer.
    pub degenerate_records: usize,
    pub eval: EvalReport,
}

pub fn find_dataset<'a>(datasets: &'a [DetectionDataset], source: &str, attack: AttackId) -> Result<&'a DetectionDataset> {
    datasets
        .iter()
        .find(|d| d.source == source && d.attack == attack)
        .ok_or_else(|| Error::MissingDataset { source_tag: source.into(), attack: attack.name().into() })
}

fn features_and_labels(records: &[&ActivationRecord], extraction: &ExtractionConfig) -> Result<(Vec<Vec<f64>>, Vec<f64>, usize)> {
    let owned: Vec<ActivationRecord> = records.iter().map(|r| (*r).clone()).collect();
    let feats = extract_batch(&owned, extraction)?;
    let degenerate = feats.iter().filter(|f| f.has_warning()).count();
    let labels = feats.iter().map(|f| f.label()).collect();
    Ok((feats.into_iter().map(|f| f.values).collect(), labels, degenerate))
}

/// Extracts features from `records` and fits the detector on them alone.
pub fn train_detector(records: &[&ActivationRecord], extraction: &ExtractionConfig, svm: &SvmParams) -> Result<SvmModel> {
    let (x, y, _) = features_and_labels(records, extraction)?;
    train_svm(&x, &y, svm)
}

/// Trains on the train split of the train dataset and evaluates on the test
/// split of the test dataset. Nothing from the test split is seen during
/// training, including the kernel width and the calibration.
pub fn run_experiment(cfg: &ExperimentConfig, datasets: &[DetectionDataset]) -> Result<ExperimentReport> {
    cfg.validate()?;
    let train_ds = find_dataset(datasets, &cfg.train_source, cfg.train_attack)?;
    let test_ds = find_dataset(datasets, &cfg.test_source, cfg.test_attack)?;
    let train_records = train_ds.records_in(Split::Train);
    let test_records = test_ds.records_in(Split::Test);
    if train_records.is_empty() || test_records.is_empty() {
        return Err(Error::Empty("experiment split is empty"));
    }
    let (x_train, y_train, deg_train) = features_and_labels(&train_records, &cfg.extraction)?;
    let model = train_svm(&x_train, &y_train, &cfg.svm)?;
    let (x_test, y_test, deg_test) = features_and_labels(&test_records, &cfg.extraction)?;
    let posteriors = model.posteriors(&x_test)?;
    Ok(ExperimentReport {
        config: cfg.clone(),
        n_train: x_train.len(),
        n_test: x_test.len(),
        support_vectors: model.support_vectors.len(),
        degenerate_records: deg_train + deg_test,
        eval: evaluate(&posteriors, &y_test)?,
    })
}
