//! KS-based hypothesis tests on posterior vectors and softmax-layer
//! features.
//!
//! H1.x fit a generalized Gaussian to each posterior vector and compare the
//! vector against draws from the fit. The parameters come from the same
//! sample that is tested, which biases the p-values upward; the rows carry
//! a note saying so. H2.x compare two sets of softmax-layer features one
//! dimension at a time and average the per-dimension p-values.

use serde::{Deserialize, Serialize};

use super::dataset::{DetectionDataset, Split};
use crate::benford::{extract_mbf_features, ExtractionConfig};
use crate::error::{Error, Result};
use crate::ggd::fit_shape;
use crate::record::{ActivationRecord, Group};
use crate::rng::derive_seed;
use crate::stats::{ks_one_sample_vs_ggd, ks_two_sample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisConfig {
    pub draws: usize,
    pub trials: usize,
    /// Examples tested per H1 row; `None` tests all of them.
    pub h1_max_examples: Option<usize>,
    pub extraction: ExtractionConfig,
    /// Record layer holding the softmax output; `None` means the last one.
    pub layer: Option<usize>,
    pub seed: u64,
}

impl Default for HypothesisConfig {
    fn default() -> Self {
        Self {
            draws: 500,
            trials: 1000,
            h1_max_examples: Some(100),
            extraction: ExtractionConfig::default(),
            layer: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisRow {
    pub test: String,
    /// Where the samples come from, e.g. `desk/bim test` or `desk→shifted`.
    pub set: String,
    pub comparison: String,
    pub p_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl HypothesisRow {
    fn new(test: &str, set: String, comparison: String, p: Result<f64>, note: Option<&str>) -> Self {
        let (p_value, note) = match p {
            Ok(p) => (Some(p), note.map(str::to_string)),
            Err(e) => (None, Some(format!("insufficient data: {e}"))),
        };
        Self { test: test.into(), set, comparison, p_value, note }
    }
}

/// Looks up a row by test id, set and comparison.
pub fn find_row<'a>(rows: &'a [HypothesisRow], test: &str, set: &str, comparison: &str) -> Option<&'a HypothesisRow> {
    rows.iter().find(|r| r.test == test && r.set == set && r.comparison == comparison)
}

/// Mean over examples of the trial-averaged p-value of each posterior
/// vector against its own fitted generalized Gaussian.
fn h1_mean_p(records: &[&ActivationRecord], cfg: &HypothesisConfig, stream: u64) -> Result<f64> {
    let take = cfg.h1_max_examples.unwrap_or(usize::MAX).min(records.len());
    if take == 0 {
        return Err(Error::Empty("no posterior vectors"));
    }
    let mut total = 0.0;
    for r in &records[..take] {
        let posterior = softmax_layer(r, cfg)?;
        let fit = fit_shape(posterior)?;
        let seed = derive_seed(derive_seed(cfg.seed, stream), r.sample_id);
        total += ks_one_sample_vs_ggd(posterior, &fit.params, cfg.draws, cfg.trials, seed)?;
    }
    Ok(total / take as f64)
}

fn softmax_layer<'a>(r: &'a ActivationRecord, cfg: &HypothesisConfig) -> Result<&'a [f64]> {
    let l = cfg.layer.unwrap_or(r.layers.len() - 1);
    r.layers.get(l).map(Vec::as_slice).ok_or_else(|| Error::InvalidParameter(format!("record has no layer {l}")))
}

/// Softmax-layer features, one column per harmonic.
fn feature_columns(records: &[&ActivationRecord], cfg: &HypothesisConfig) -> Result<Vec<Vec<f64>>> {
    let t = cfg.extraction.harmonics;
    let mut cols = vec![Vec::with_capacity(records.len()); t];
    for r in records {
        let single = ActivationRecord { layers: vec![softmax_layer(r, cfg)?.to_vec()], ..(*r).clone() };
        let f = extract_mbf_features(&single, &cfg.extraction)?;
        for (col, v) in cols.iter_mut().zip(f.values) {
            col.push(v);
        }
    }
    Ok(cols)
}

/// Average over dimensions of the two-sample KS p-value.
pub fn average_dimension_p(a: &[&ActivationRecord], b: &[&ActivationRecord], cfg: &HypothesisConfig) -> Result<f64> {
    let (ca, cb) = (feature_columns(a, cfg)?, feature_columns(b, cfg)?);
    let mut total = 0.0;
    for (x, y) in ca.iter().zip(&cb) {
        total += ks_two_sample(x, y)?.p_value;
    }
    Ok(total / ca.len() as f64)
}

const SELF_FIT_NOTE: &str = "reference parameters are fitted on the tested sample, so p-values are biased upward";

/// Runs every test the datasets allow. The first dataset is the reference
/// (its source is the in-sample source). Tests needing data that is not
/// there appear with `p_value: None` and a note.
pub fn hypothesis_suite(datasets: &[DetectionDataset], cfg: &HypothesisConfig) -> Result<Vec<HypothesisRow>> {
    let first = datasets.first().ok_or(Error::Empty("hypothesis suite needs a dataset"))?;
    if cfg.extraction.harmonics == 0 || cfg.draws == 0 || cfg.trials == 0 {
        return Err(Error::InvalidParameter("harmonics, draws and trials must be positive".into()));
    }
    let home = first.source.clone();
    let mut rows = Vec::new();
    let label = |d: &DetectionDataset, s: Option<Split>| match s {
        Some(Split::Train) => format!("{}/{} train", d.source, d.attack),
        Some(Split::Test) => format!("{}/{} test", d.source, d.attack),
        None => format!("{}/{}", d.source, d.attack),
    };

    for (i, d) in datasets.iter().enumerate() {
        let adv = d.records_of(None, Group::Adversarial);
        rows.push(HypothesisRow::new(
            "H1.1",
            label(d, None),
            format!("p_adv ~ GGD ({})", d.attack),
            h1_mean_p(&adv, cfg, 2 * i as u64),
            Some(SELF_FIT_NOTE),
        ));
        let clean = d.records_of(None, Group::Clean);
        rows.push(HypothesisRow::new(
            "H1.2",
            label(d, None),
            "p_ben ~ GGD (clean)".into(),
            h1_mean_p(&clean, cfg, 2 * i as u64 + 1),
            Some(SELF_FIT_NOTE),
        ));
    }

    for d in datasets {
        for split in [Split::Train, Split::Test] {
            let clean = d.records_of(Some(split), Group::Clean);
            let noisy = d.records_of(Some(split), Group::Noisy);
            let adv = d.records_of(Some(split), Group::Adversarial);
            let set = label(d, Some(split));
            rows.push(HypothesisRow::new("H2.1", set.clone(), "(clean, noisy)".into(), average_dimension_p(&clean, &noisy, cfg), None));
            rows.push(HypothesisRow::new(
                "H2.1",
                set,
                format!("(clean, {})", d.attack),
                average_dimension_p(&clean, &adv, cfg),
                None,
            ));
        }
    }

    for (i, a) in datasets.iter().enumerate() {
        for b in datasets.iter().skip(i + 1).filter(|b| b.source == a.source && b.attack != a.attack) {
            for split in [Split::Train, Split::Test] {
                let xa = a.records_of(Some(split), Group::Adversarial);
                let xb = b.records_of(Some(split), Group::Adversarial);
                let set = format!("{} {}", a.source, if split == Split::Train { "train" } else { "test" });
                rows.push(HypothesisRow::new(
                    "H2.2",
                    set,
                    format!("({}, {})", a.attack, b.attack),
                    average_dimension_p(&xa, &xb, cfg),
                    None,
                ));
            }
        }
    }

    for d in datasets.iter().filter(|d| d.source == home) {
        let set = label(d, None);
        for (test, group) in [("H2.3", Group::Adversarial), ("H2.4", Group::Clean), ("H2.4", Group::Noisy)] {
            let tr = d.records_of(Some(Split::Train), group);
            let te = d.records_of(Some(Split::Test), group);
            rows.push(HypothesisRow::new(test, set.clone(), format!("(train, test) {group}"), average_dimension_p(&tr, &te, cfg), None));
        }
        for other in datasets.iter().filter(|o| o.source != home && o.attack == d.attack) {
            let set = format!("{}→{}/{}", home, other.source, d.attack);
            for (test, group) in [("H2.3", Group::Adversarial), ("H2.4", Group::Clean), ("H2.4", Group::Noisy)] {
                let tr = d.records_of(Some(Split::Train), group);
                let out = other.records_of(None, group);
                rows.push(HypothesisRow::new(
                    test,
                    set.clone(),
                    format!("(train, out-of-sample) {group}"),
                    average_dimension_p(&tr, &out, cfg),
                    None,
                ));
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::AttackId;
    use rand::Rng;

    /// Clean and noisy posteriors are one confident peak over tiny
    /// log-uniform entries; adversarial ones are flat when `flat_adv`.
    fn dataset(flat_adv: bool, seed: u64) -> DetectionDataset {
        let mut rng = crate::rng::rng_from_seed(seed);
        let mut records = Vec::new();
        let posterior = |flat: bool, rng: &mut rand_chacha::ChaCha8Rng| {
            let mut v: Vec<f64> = if flat {
                (0..10).map(|_| rng.random_range(0.05..0.15)).collect()
            } else {
                (0..10).map(|_| 10f64.powf(rng.random_range(-4.0..-2.0))).collect()
            };
            if !flat {
                v[rng.random_range(0..10)] = 0.9;
            }
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect::<Vec<f64>>()
        };
        for id in 0..60u64 {
            for (g, a, flat) in [
                (Group::Clean, AttackId::None, false),
                (Group::Noisy, AttackId::None, false),
                (Group::Adversarial, AttackId::Bim, flat_adv),
            ] {
                let p = posterior(flat, &mut rng);
                records.push(ActivationRecord::new(id, g, a, 0, vec![vec![1.0, 2.0], p]).unwrap());
            }
        }
        DetectionDataset {
            source: "desk".into(),
            attack: AttackId::Bim,
            records,
            train_ids: (0..48).collect(),
            test_ids: (48..60).collect(),
            summary: crate::pipeline::dataset::BuildSummary::external("desk", AttackId::Bim),
        }
    }

    #[test]
    fn directions_on_synthetic_posteriors() {
        let cfg = HypothesisConfig { trials: 20, h1_max_examples: Some(5), ..Default::default() };
        let rows = hypothesis_suite(&[dataset(true, 1)], &cfg).unwrap();
        let p = |test: &str, set: &str, cmp: &str| find_row(&rows, test, set, cmp).unwrap().p_value.unwrap();
        assert!(p("H2.1", "desk/bim train", "(clean, noisy)") > 0.05);
        assert!(p("H2.1", "desk/bim train", "(clean, bim)") < 0.05);
        assert!(p("H2.4", "desk/bim", "(train, test) clean") > 0.05);
        let h1 = find_row(&rows, "H1.1", "desk/bim", "p_adv ~ GGD (bim)").unwrap();
        assert!(h1.p_value.unwrap() >= 0.0 && h1.note.is_some());
    }

    #[test]
    fn missing_data_is_marked_per_cell() {
        let mut d = dataset(true, 2);
        d.test_ids.clear();
        let cfg = HypothesisConfig { trials: 5, h1_max_examples: Some(2), ..Default::default() };
        let rows = hypothesis_suite(&[d], &cfg).unwrap();
        let r = find_row(&rows, "H2.1", "desk/bim test", "(clean, noisy)").unwrap();
        assert!(r.p_value.is_none() && r.note.as_deref().unwrap().starts_with("insufficient"));
    }
}
