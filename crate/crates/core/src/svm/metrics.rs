//! Detection metrics: AUROC by rank statistics and 0.5-threshold accuracy.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_labels(scores: &[f64], labels: &[f64]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: scores.len(), found: labels.len() });
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let mut pos = 0;
    for (i, &y) in labels.iter().enumerate() {
        if y == 1.0 {
            pos += 1;
        } else if y != -1.0 {
            return Err(Error::InvalidParameter(format!("label {i} is {y}, expected ±1")));
        }
    }
    Ok((pos, labels.len() - pos))
}

/// Area under the ROC curve, `P(s+ > s-) + ½ P(s+ = s-)`, from mid-ranks.
pub fn auroc(scores: &[f64], labels: &[f64]) -> Result<f64> {
    let (n_pos, n_neg) = check_labels(scores, labels)?;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(Ordering::Equal));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1..=j+1 share their mean
        let mid_rank = (i + j + 2) as f64 / 2.0;
        for &k in &order[i..=j] {
            if labels[k] == 1.0 {
                rank_sum_pos += mid_rank;
            }
        }
        i = j + 1;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n))
}

/// ROC points `(fpr, tpr)` from the strictest threshold to the loosest,
/// starting at `(0, 0)` and ending at `(1, 1)`.
pub fn roc_curve(scores: &[f64], labels: &[f64]) -> Result<Vec<(f64, f64)>> {
    let (n_pos, n_neg) = check_labels(scores, labels)?;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] == 1.0 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
    }
    Ok(points)
}

/// 2×2 confusion counts with adversarial (+1) as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub true_positive: usize,
    pub true_negative: usize,
    pub false_positive: usize,
    pub false_negative: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.true_positive + self.true_negative + self.false_positive + self.false_negative
    }

    pub fn accuracy(&self) -> f64 {
        (self.true_positive + self.true_negative) as f64 / self.total() as f64
    }
}

/// Detection summary over one evaluation set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub auroc: f64,
    pub accuracy: f64,
    pub confusion: Confusion,
    pub n_benign: usize,
    pub n_adversarial: usize,
}

/// Posterior ≥ 0.5 is called adversarial.
pub fn accuracy_at_half(posteriors: &[f64], labels: &[f64]) -> Result<(f64, Confusion)> {
    check_labels(posteriors, labels)?;
    if posteriors.is_empty() {
        return Err(Error::Empty("no posteriors to threshold"));
    }
    let mut cm = Confusion::default();
    for (&p, &y) in posteriors.iter().zip(labels) {
        match (p >= 0.5, y == 1.0) {
            (true, true) => cm.true_positive += 1,
            (false, false) => cm.true_negative += 1,
            (true, false) => cm.false_positive += 1,
            (false, true) => cm.false_negative += 1,
        }
    }
    Ok((cm.accuracy(), cm))
}

/// AUROC and thresholded accuracy of posteriors.
pub fn evaluate(posteriors: &[f64], labels: &[f64]) -> Result<EvalReport> {
    let auroc = auroc(posteriors, labels)?;
    let (accuracy, confusion) = accuracy_at_half(posteriors, labels)?;
    let n_adversarial = labels.iter().filter(|&&y| y == 1.0).count();
    Ok(EvalReport {
        auroc,
        accuracy,
        confusion,
        n_benign: labels.len() - n_adversarial,
        n_adversarial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auroc_examples() {
        assert_eq!(auroc(&[0.9, 0.8, 0.1, 0.2], &[1.0, 1.0, -1.0, -1.0]).unwrap(), 1.0);
        assert_eq!(auroc(&[0.1, 0.4, 0.35, 0.8], &[-1.0, -1.0, 1.0, 1.0]).unwrap(), 0.75);
        assert_eq!(auroc(&[0.3; 6], &[1.0, -1.0, 1.0, -1.0, -1.0, 1.0]).unwrap(), 0.5);
        assert_eq!(auroc(&[0.1, 0.2], &[1.0, 1.0]), Err(Error::SingleClass));
        assert!(auroc(&[0.1], &[1.0, -1.0]).is_err());
        assert!(auroc(&[0.1, 0.2], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(accuracy_at_half(&[0.9, 0.1], &[1.0, -1.0]).unwrap().0, 1.0);
        assert_eq!(accuracy_at_half(&[0.4, 0.6], &[1.0, -1.0]).unwrap().0, 0.0);
        let (acc, cm) = accuracy_at_half(&[0.6, 0.6, 0.4, 0.2], &[1.0, -1.0, -1.0, -1.0]).unwrap();
        assert_eq!(acc, 0.75);
        assert_eq!(cm, Confusion { true_positive: 1, true_negative: 2, false_positive: 1, false_negative: 0 });
    }

    #[test]
    fn evaluate_counts() {
        let r = evaluate(&[0.6, 0.6, 0.4, 0.2], &[1.0, -1.0, -1.0, -1.0]).unwrap();
        assert_eq!(r.n_adversarial, 1);
        assert_eq!(r.n_benign, 3);
        assert_eq!(r.confusion.total(), 4);
    }
}
