//! Binary kernel SVM detector with Platt-calibrated posteriors.

mod metrics;
mod platt;
mod smo;

pub use metrics::{accuracy_at_half, auroc, evaluate, roc_curve, Confusion, EvalReport};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::rng::rng_from_seed;

/// Kernel of a trained model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    Rbf { gamma: f64 },
    Linear,
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

/// Kernel requested at training time; an RBF width of `None` resolves to
/// `1 / (dim · var)` over the training feature matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KernelChoice {
    Rbf { gamma: Option<f64> },
    Linear,
}

impl Default for KernelChoice {
    fn default() -> Self {
        KernelChoice::Rbf { gamma: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub kernel: KernelChoice,
    pub tol: f64,
    /// Cap on SMO pair updates; `None` uses `max(10⁷, 100 n)`.
    pub max_iter: Option<usize>,
    pub calibration_folds: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            kernel: KernelChoice::default(),
            tol: 1e-3,
            max_iter: None,
            calibration_folds: 3,
            seed: 0,
        }
    }
}

/// Where the Platt parameters were fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationSource {
    OutOfFold,
    /// Fallback for sets too small to split with both classes in every fold.
    InSample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// `α_i y_i` for each support vector.
    pub dual_coeffs: Vec<f64>,
    pub bias: f64,
    pub kernel: Kernel,
    pub platt_a: f64,
    pub platt_b: f64,
    pub feature_dim: usize,
    pub calibration: CalibrationSource,
}

/// Solver diagnostics of the final fit.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainStats {
    pub iterations: usize,
    pub converged: bool,
    /// `max_{I_up} −y G − min_{I_low} −y G` at exit.
    pub kkt_gap: f64,
    /// Largest per-point KKT violation of the returned decision function.
    pub max_kkt_violation: f64,
    pub objective_trace: Vec<f64>,
    /// Full dual vector in training order.
    pub alpha: Vec<f64>,
}

impl SvmModel {
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.feature_dim {
            return Err(Error::DimensionMismatch { expected: self.feature_dim, found: x.len() });
        }
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.dual_coeffs)
            .map(|(sv, coef)| coef * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias)
    }

    /// Calibrated probability that `x` is adversarial.
    pub fn posterior(&self, x: &[f64]) -> Result<f64> {
        Ok(sigmoid_posterior(self.platt_a, self.platt_b, self.decision_value(x)?))
    }

    pub fn posteriors(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        par::map_slice(xs, |x| self.posterior(x)).into_iter().collect()
    }
}

fn sigmoid_posterior(a: f64, b: f64, f: f64) -> f64 {
    let z = a * f + b;
    if z >= 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

fn validate(features: &[Vec<f64>], labels: &[f64], params: &SvmParams) -> Result<usize> {
    if features.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: features.len(), found: labels.len() });
    }
    if features.len() < 2 {
        return Err(Error::Precondition("SVM training needs at least two points".into()));
    }
    let dim = features[0].len();
    if dim == 0 {
        return Err(Error::InvalidParameter("feature vectors are empty".into()));
    }
    for (i, f) in features.iter().enumerate() {
        if f.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: f.len() });
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
    }
    if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
        return Err(Error::InvalidParameter("labels must be ±1".into()));
    }
    if !(labels.contains(&1.0) && labels.contains(&-1.0)) {
        return Err(Error::SingleClass);
    }
    if !(params.c > 0.0) || !(params.tol > 0.0) {
        return Err(Error::InvalidParameter("C and tol must be positive".into()));
    }
    Ok(dim)
}

fn resolve_kernel(choice: KernelChoice, features: &[Vec<f64>], dim: usize) -> Result<Kernel> {
    match choice {
        KernelChoice::Linear => Ok(Kernel::Linear),
        KernelChoice::Rbf { gamma: Some(g) } if g > 0.0 && g.is_finite() => Ok(Kernel::Rbf { gamma: g }),
        KernelChoice::Rbf { gamma: Some(g) } => {
            Err(Error::InvalidParameter(format!("RBF gamma must be positive, got {g}")))
        }
        KernelChoice::Rbf { gamma: None } => {
            let count = (features.len() * dim) as f64;
            let mean = features.iter().flatten().sum::<f64>() / count;
            let var = features.iter().flatten().map(|v| (v - mean).powi(2)).sum::<f64>() / count;
            let denom = dim as f64 * if var > 0.0 { var } else { 1.0 };
            Ok(Kernel::Rbf { gamma: 1.0 / denom })
        }
    }
}

fn gram(kernel: &Kernel, xs: &[Vec<f64>]) -> Vec<f64> {
    par::map_range(xs.len(), |i| xs.iter().map(|xj| kernel.eval(&xs[i], xj)).collect::<Vec<_>>())
        .into_iter()
        .flatten()
        .collect()
}

fn fit_uncalibrated(
    features: &[Vec<f64>],
    labels: &[f64],
    kernel: Kernel,
    params: &SvmParams,
) -> (SvmModel, TrainStats) {
    let n = features.len();
    let k = gram(&kernel, features);
    let max_iter = params.max_iter.unwrap_or_else(|| (100 * n).max(10_000_000));
    let out = smo::solve(&k, labels, params.c, params.tol, max_iter);
    let violation = smo::max_kkt_violation(&k, labels, &out.alpha, out.rho, params.c);
    let mut support_vectors = Vec::new();
    let mut dual_coeffs = Vec::new();
    for (i, &a) in out.alpha.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(features[i].clone());
            dual_coeffs.push(a * labels[i]);
        }
    }
    let model = SvmModel {
        support_vectors,
        dual_coeffs,
        bias: -out.rho,
        kernel,
        platt_a: -1.0,
        platt_b: 0.0,
        feature_dim: features[0].len(),
        calibration: CalibrationSource::InSample,
    };
    let stats = TrainStats {
        iterations: out.iterations,
        converged: out.converged,
        kkt_gap: out.kkt_gap,
        max_kkt_violation: violation,
        objective_trace: out.objective_trace,
        alpha: out.alpha,
    };
    (model, stats)
}

/// Stratified fold assignment: each class is shuffled and dealt round-robin.
fn fold_assignment(labels: &[f64], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng_from_seed(seed);
    let mut assignment = vec![0; labels.len()];
    for class in [1.0, -1.0] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        for (pos, i) in idx.into_iter().enumerate() {
            assignment[i] = pos % folds;
        }
    }
    assignment
}

/// Out-of-fold decision values, or `None` when some training fold would be
/// single-class.
fn out_of_fold_decisions(
    features: &[Vec<f64>],
    labels: &[f64],
    kernel: Kernel,
    params: &SvmParams,
) -> Option<Vec<f64>> {
    let folds = params.calibration_folds;
    if folds < 2 {
        return None;
    }
    let n_pos = labels.iter().filter(|&&y| y > 0.0).count();
    let n_neg = labels.len() - n_pos;
    if n_pos < folds || n_neg < folds {
        return None;
    }
    let assignment = fold_assignment(labels, folds, params.seed);
    let mut decisions = vec![0.0; labels.len()];
    for fold in 0..folds {
        let (train_x, train_y): (Vec<Vec<f64>>, Vec<f64>) = (0..labels.len())
            .filter(|&i| assignment[i] != fold)
            .map(|i| (features[i].clone(), labels[i]))
            .unzip();
        let (model, _) = fit_uncalibrated(&train_x, &train_y, kernel, params);
        for i in (0..labels.len()).filter(|&i| assignment[i] == fold) {
            decisions[i] = model.decision_value(&features[i]).ok()?;
        }
    }
    Some(decisions)
}

/// Trains the detector and its Platt calibration.
pub fn train_svm(features: &[Vec<f64>], labels: &[f64], params: &SvmParams) -> Result<SvmModel> {
    Ok(train_svm_with_stats(features, labels, params)?.0)
}

/// [`train_svm`] plus solver diagnostics of the final (full-data) fit.
pub fn train_svm_with_stats(
    features: &[Vec<f64>],
    labels: &[f64],
    params: &SvmParams,
) -> Result<(SvmModel, TrainStats)> {
    let dim = validate(features, labels, params)?;
    let kernel = resolve_kernel(params.kernel, features, dim)?;
    let (mut model, stats) = fit_uncalibrated(features, labels, kernel, params);
    let (decisions, source) = match out_of_fold_decisions(features, labels, kernel, params) {
        Some(d) => (d, CalibrationSource::OutOfFold),
        None => (
            features.iter().map(|x| model.decision_value(x)).collect::<Result<Vec<_>>>()?,
            CalibrationSource::InSample,
        ),
    };
    let (a, b) = platt::fit(&decisions, labels);
    model.platt_a = a;
    model.platt_b = b;
    model.calibration = source;
    Ok((model, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor() -> (Vec<Vec<f64>>, Vec<f64>) {
        (
            vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![-1.0, -1.0, 1.0, 1.0],
        )
    }

    #[test]
    fn separable_pair_linear() {
        let x = vec![vec![0.0; 3], vec![1.0; 3]];
        let y = vec![-1.0, 1.0];
        let params = SvmParams { kernel: KernelChoice::Linear, ..Default::default() };
        let model = train_svm(&x, &y, &params).unwrap();
        assert!(model.decision_value(&x[0]).unwrap() < 0.0);
        assert!(model.decision_value(&x[1]).unwrap() > 0.0);
        assert_eq!(model.calibration, CalibrationSource::InSample);
        for sv in &model.support_vectors {
            let label = if sv[0] > 0.5 { 1.0 } else { -1.0 };
            assert_eq!(model.decision_value(sv).unwrap().signum(), label);
        }
    }

    #[test]
    fn xor_rbf_fits_and_satisfies_kkt() {
        let (x, y) = xor();
        let params = SvmParams { c: 10.0, kernel: KernelChoice::Rbf { gamma: Some(1.0) }, ..Default::default() };
        let (model, stats) = train_svm_with_stats(&x, &y, &params).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(model.decision_value(xi).unwrap().signum(), *yi);
        }
        assert!(stats.converged);
        assert!(stats.max_kkt_violation <= 1e-3, "{stats:?}");
        // Dual feasibility by brute force over the 4-point problem.
        let sum: f64 = stats.alpha.iter().zip(&y).map(|(a, y)| a * y).sum();
        assert!(sum.abs() < 1e-9);
        assert!(stats.alpha.iter().all(|&a| (0.0..=10.0).contains(&a)));
    }

    #[test]
    fn contradictory_duplicates_converge() {
        let x = vec![vec![0.5, 0.5], vec![0.5, 0.5], vec![0.0, 0.0], vec![1.0, 1.0]];
        let y = vec![1.0, -1.0, -1.0, 1.0];
        let params = SvmParams { c: 1.0, kernel: KernelChoice::Rbf { gamma: Some(1.0) }, ..Default::default() };
        let (model, stats) = train_svm_with_stats(&x, &y, &params).unwrap();
        assert!(stats.converged);
        for i in 0..2 {
            assert!(stats.alpha[i] > 0.0 && stats.alpha[i] <= 1.0 + 1e-12);
            let slack = 1.0 - y[i] * model.decision_value(&x[i]).unwrap();
            assert!(slack > 0.0);
        }
    }

    #[test]
    fn objective_non_increasing() {
        let mut rng = crate::rng::rng_from_seed(4);
        use rand::Rng;
        let x: Vec<Vec<f64>> = (0..80).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
        let y: Vec<f64> = x.iter().map(|v| if v[0] * v[0] + v[1] > 0.7 { 1.0 } else { -1.0 }).collect();
        let (_, stats) = train_svm_with_stats(&x, &y, &SvmParams::default()).unwrap();
        for w in stats.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        assert!(stats.max_kkt_violation <= 1e-3);
    }

    #[test]
    fn input_validation() {
        let p = SvmParams::default();
        assert_eq!(train_svm(&[vec![0.0], vec![1.0]], &[1.0, 1.0], &p), Err(Error::SingleClass));
        assert!(matches!(train_svm(&[vec![0.0], vec![f64::NAN]], &[1.0, -1.0], &p), Err(Error::NonFinite(1))));
        assert!(train_svm(&[vec![0.0]], &[1.0], &p).is_err());
        let (x, y) = xor();
        let model = train_svm(&x, &y, &p).unwrap();
        assert!(matches!(model.decision_value(&[0.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn posterior_is_logistic_in_decision() {
        let (x, y) = xor();
        let mut model = train_svm(&x, &y, &SvmParams::default()).unwrap();
        model.platt_a = -1.5;
        model.platt_b = 0.2;
        let mut prev = 0.0;
        for f in [-10.0, -2.0, -0.1, 0.0, 0.4, 3.0, 10.0] {
            let p = sigmoid_posterior(model.platt_a, model.platt_b, f);
            assert!(p > 0.0 && p < 1.0);
            assert!(p > prev);
            prev = p;
        }
    }
}
