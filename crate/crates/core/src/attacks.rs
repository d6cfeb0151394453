//! Gradient attacks on [`TinyNet`] and Gaussian-noisy example crafting.
//! Inputs live in `[0, 1]^d`; every attack output is clipped to that range.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{max_other, Loss, TinyNet};
use crate::par;
use crate::record::AttackId;
use crate::rng::{child_rng, rng_from_seed};

/// Attack hyperparameters. Only the fields relevant to `method` are read.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub method: AttackId,
    pub eps: f64,
    pub stepsize: f64,
    pub iterations: usize,
    pub max_steps: usize,
    pub overshoot: f64,
    pub binary_search_steps: usize,
    pub max_iterations: usize,
    pub confidence: f64,
    pub learning_rate: f64,
    pub initial_const: f64,
    /// ℓ∞ attacks: stop a run at the first misclassifying iterate.
    pub return_early: bool,
    /// ℓ∞ attacks: bisection steps on ε below the configured value, keeping
    /// the smallest successful perturbation; 0 runs once at `eps`.
    pub eps_search_steps: usize,
    pub seed: u64,
}

impl AttackConfig {
    /// Defaults for `method`: BIM 0.3/0.05/10, R-PGD 0.3/0.01/40,
    /// DeepFool 100 steps, CW-L2 5 searches × 1000 iterations at lr 0.005.
    pub fn for_method(method: AttackId) -> Result<Self> {
        let base = Self {
            method,
            eps: 0.3,
            stepsize: 0.05,
            iterations: 10,
            max_steps: 100,
            overshoot: 0.02,
            binary_search_steps: 5,
            max_iterations: 1000,
            confidence: 0.0,
            learning_rate: 0.005,
            initial_const: 1e-2,
            return_early: true,
            eps_search_steps: 10,
            seed: 0,
        };
        Ok(match method {
            AttackId::None => return Err(Error::InvalidParameter("`none` is not an attack".into())),
            AttackId::Fgsm => Self { stepsize: 0.3, iterations: 1, ..base },
            AttackId::Bim => base,
            AttackId::Rpgd => Self { stepsize: 0.01, iterations: 40, ..base },
            AttackId::DeepFool | AttackId::CwL2 => base,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        match self.method {
            AttackId::None => return bad("`none` is not an attack"),
            AttackId::Fgsm | AttackId::Bim | AttackId::Rpgd => {
                if !(self.eps >= 0.0 && self.eps.is_finite()) {
                    return bad("eps must be finite and nonnegative");
                }
                if !(self.stepsize >= 0.0 && self.stepsize.is_finite()) {
                    return bad("stepsize must be finite and nonnegative");
                }
                if self.iterations == 0 {
                    return bad("iterations must be at least 1");
                }
            }
            AttackId::DeepFool => {
                if self.max_steps == 0 {
                    return bad("max_steps must be at least 1");
                }
                if !(self.overshoot >= 0.0 && self.overshoot.is_finite()) {
                    return bad("overshoot must be finite and nonnegative");
                }
            }
            AttackId::CwL2 => {
                if self.binary_search_steps == 0 || self.max_iterations == 0 {
                    return bad("CW iteration counts must be at least 1");
                }
                if !(self.learning_rate > 0.0 && self.initial_const > 0.0 && self.confidence >= 0.0) {
                    return bad("CW learning rate and constant must be positive, confidence nonnegative");
                }
            }
        }
        Ok(())
    }
}

/// Final iterate and whether an independent forward pass misclassifies it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackOutcome {
    pub adversarial: Vec<f64>,
    pub success: bool,
    pub predicted: usize,
}

fn outcome(net: &TinyNet, adversarial: Vec<f64>, y: usize) -> Result<AttackOutcome> {
    let predicted = net.predict(&adversarial)?;
    Ok(AttackOutcome { adversarial, success: predicted != y, predicted })
}

fn require_correct(net: &TinyNet, x: &[f64], y: usize) -> Result<()> {
    if y >= net.classes() {
        return Err(Error::InvalidParameter(format!("class {y} out of range")));
    }
    let p = net.predict(x)?;
    if p != y {
        return Err(Error::Precondition(format!("input is classified as {p}, not {y}")));
    }
    Ok(())
}

pub fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn linf_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Sign-gradient ascent on cross-entropy from `start`, projected onto the
/// ℓ∞ ball around `x` and the unit box after every step. Returns the last
/// iterate and whether it misclassifies; with `return_early` the run stops
/// at the first iterate that does.
#[allow(clippy::too_many_arguments)]
fn projected_sign_ascent(
    net: &TinyNet,
    x: &[f64],
    start: Vec<f64>,
    y: usize,
    step: f64,
    eps: f64,
    iters: usize,
    return_early: bool,
) -> Result<(Vec<f64>, bool)> {
    let mut cur = start;
    let mut fooled = false;
    for _ in 0..iters {
        let g = net.gradient_input(&cur, y, Loss::CrossEntropy)?;
        for ((c, gi), x0) in cur.iter_mut().zip(&g).zip(x) {
            let v = *c + step * sign(*gi);
            *c = v.clamp(x0 - eps, x0 + eps).clamp(0.0, 1.0);
        }
        fooled = net.predict(&cur)? != y;
        if fooled && return_early {
            break;
        }
    }
    Ok((cur, fooled))
}

/// Runs the ℓ∞ attack at `cfg.eps`, then bisects ε in `(0, cfg.eps]` with
/// the step/ε ratio fixed, keeping the successful iterate closest to `x`
/// in ℓ2. ε never exceeds `cfg.eps`.
fn minimal_linf<F>(net: &TinyNet, x: &[f64], y: usize, cfg: &AttackConfig, mut start: F) -> Result<AttackOutcome>
where
    F: FnMut(f64) -> Vec<f64>,
{
    let ratio = if cfg.eps > 0.0 { cfg.stepsize / cfg.eps } else { 0.0 };
    let mut run = |eps: f64| projected_sign_ascent(net, x, start(eps), y, ratio * eps, eps, cfg.iterations, cfg.return_early);
    let (first, ok) = if cfg.eps > 0.0 {
        run(cfg.eps)?
    } else {
        projected_sign_ascent(net, x, x.to_vec(), y, cfg.stepsize, 0.0, cfg.iterations, cfg.return_early)?
    };
    if !ok || cfg.eps_search_steps == 0 {
        return outcome(net, first, y);
    }
    let mut best = (l2_distance(&first, x), first);
    let (mut bad, mut good) = (0.0, cfg.eps);
    for _ in 0..cfg.eps_search_steps {
        let eps = 0.5 * (bad + good);
        let (adv, ok) = run(eps)?;
        if ok {
            good = eps;
            let d = l2_distance(&adv, x);
            if d < best.0 {
                best = (d, adv);
            }
        } else {
            bad = eps;
        }
    }
    outcome(net, best.1, y)
}

/// Single signed-gradient step of size `eps`, without any search.
pub fn fgsm(net: &TinyNet, x: &[f64], y: usize, eps: f64) -> Result<AttackOutcome> {
    let cfg = AttackConfig {
        eps,
        stepsize: eps,
        iterations: 1,
        eps_search_steps: 0,
        ..AttackConfig::for_method(AttackId::Fgsm)?
    };
    bim(net, x, y, &cfg)
}

pub fn bim(net: &TinyNet, x: &[f64], y: usize, cfg: &AttackConfig) -> Result<AttackOutcome> {
    require_correct(net, x, y)?;
    minimal_linf(net, x, y, cfg, |_| x.to_vec())
}

/// BIM from a uniform random start in the ε-ball. Every run of the ε search
/// draws a fresh start from stream `sample_id` of `cfg.seed`.
pub fn rpgd(net: &TinyNet, x: &[f64], y: usize, cfg: &AttackConfig, sample_id: u64) -> Result<AttackOutcome> {
    require_correct(net, x, y)?;
    let mut rng = child_rng(cfg.seed, sample_id);
    minimal_linf(net, x, y, cfg, |eps| {
        x.iter()
            .map(|&v| {
                let d = if eps > 0.0 { rng.random_range(-eps..=eps) } else { 0.0 };
                (v + d).clamp(0.0, 1.0)
            })
            .collect()
    })
}

/// Multiclass DeepFool: repeatedly step to the nearest linearized class
/// boundary, accumulating the perturbation, and apply it scaled by
/// `1 + overshoot`.
pub fn deepfool(net: &TinyNet, x: &[f64], y: usize, cfg: &AttackConfig) -> Result<AttackOutcome> {
    require_correct(net, x, y)?;
    let k = net.classes();
    let mut r_total = vec![0.0; x.len()];
    let mut cur = x.to_vec();
    for _ in 0..cfg.max_steps {
        let pass = net.forward(&cur)?;
        if pass.predicted() != y {
            break;
        }
        let z = pass.logits().to_vec();
        let mut onehot = vec![0.0; k];
        onehot[y] = 1.0;
        let g_y = net.input_gradient_from_logits(&pass, &onehot)?;
        let mut best: Option<(f64, f64, Vec<f64>)> = None;
        for j in (0..k).filter(|&j| j != y) {
            onehot.iter_mut().for_each(|v| *v = 0.0);
            onehot[j] = 1.0;
            let g_j = net.input_gradient_from_logits(&pass, &onehot)?;
            let w: Vec<f64> = g_j.iter().zip(&g_y).map(|(a, b)| a - b).collect();
            let f = z[j] - z[y];
            let norm2: f64 = w.iter().map(|v| v * v).sum();
            if norm2 == 0.0 {
                continue;
            }
            let dist = f.abs() / norm2.sqrt();
            if best.as_ref().is_none_or(|b| dist < b.0) {
                best = Some((dist, f.abs() / norm2, w));
            }
        }
        let Some((_, scale, w)) = best else { break };
        for (r, wi) in r_total.iter_mut().zip(&w) {
            *r += scale * wi;
        }
        for ((c, x0), r) in cur.iter_mut().zip(x).zip(&r_total) {
            *c = (x0 + (1.0 + cfg.overshoot) * r).clamp(0.0, 1.0);
        }
    }
    outcome(net, cur, y)
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        self.t += 1;
        let c1 = 1.0 - B1.powi(self.t);
        let c2 = 1.0 - B2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = B1 * self.m[i] + (1.0 - B1) * grad[i];
            self.v[i] = B2 * self.v[i] + (1.0 - B2) * grad[i] * grad[i];
            params[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + 1e-8);
        }
    }
}

/// Carlini–Wagner ℓ2 in tanh space with Adam. The trade-off constant starts
/// at `initial_const`, grows ×10 until an adversarial is found and is then
/// bisected. Returns the smallest successful perturbation, or the last
/// iterate when none succeeded.
pub fn cw_l2(net: &TinyNet, x: &[f64], y: usize, cfg: &AttackConfig) -> Result<AttackOutcome> {
    require_correct(net, x, y)?;
    const UPPER_INIT: f64 = 1e10;
    let to_box = |w: &[f64]| -> Vec<f64> { w.iter().map(|v| 0.5 * (v.tanh() + 1.0)).collect() };
    let w0: Vec<f64> = x.iter().map(|&v| ((2.0 * v - 1.0) * 0.999_999).atanh()).collect();
    let x_box = to_box(&w0);
    let (mut lower, mut upper, mut c) = (0.0f64, UPPER_INIT, cfg.initial_const);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut last = x.to_vec();
    let check_every = (cfg.max_iterations / 10).max(1);
    for _ in 0..cfg.binary_search_steps {
        let mut w = w0.clone();
        let mut adam = Adam::new(w.len());
        let mut found_this_round = false;
        let mut prev_loss = f64::INFINITY;
        for it in 0..cfg.max_iterations {
            let adv = to_box(&w);
            let pass = net.forward(&adv)?;
            let z = pass.logits();
            let (j, zj) = max_other(z, y);
            let margin = z[y] - zj + cfg.confidence;
            let dist2: f64 = adv.iter().zip(&x_box).map(|(a, b)| (a - b) * (a - b)).sum();
            let loss = dist2 + c * margin.max(0.0);
            if pass.predicted() != y && z[y] - zj <= -cfg.confidence {
                found_this_round = true;
                let d = l2_distance(&adv, x);
                if best.as_ref().is_none_or(|b| d < b.0) {
                    best = Some((d, adv.clone()));
                }
            }
            let mut g_adv: Vec<f64> = adv.iter().zip(&x_box).map(|(a, b)| 2.0 * (a - b)).collect();
            if margin > 0.0 {
                let mut dl = vec![0.0; z.len()];
                dl[y] = c;
                dl[j] = -c;
                let g = net.input_gradient_from_logits(&pass, &dl)?;
                g_adv.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
            }
            let g_w: Vec<f64> = g_adv.iter().zip(&w).map(|(g, wi)| g * 0.5 * (1.0 - wi.tanh().powi(2))).collect();
            adam.step(&mut w, &g_w, cfg.learning_rate);
            last = adv;
            if (it + 1) % check_every == 0 {
                if loss > prev_loss * 0.9999 {
                    break;
                }
                prev_loss = loss;
            }
        }
        if found_this_round {
            upper = upper.min(c);
            c = 0.5 * (lower + upper);
        } else {
            lower = lower.max(c);
            c = if upper < UPPER_INIT * 0.1 { 0.5 * (lower + upper) } else { c * 10.0 };
        }
    }
    match best {
        Some((_, adv)) => outcome(net, adv, y),
        None => outcome(net, last, y),
    }
}

/// Dispatches on `cfg.method`; `sample_id` selects the random stream.
pub fn run_attack(net: &TinyNet, x: &[f64], y: usize, cfg: &AttackConfig, sample_id: u64) -> Result<AttackOutcome> {
    cfg.validate()?;
    match cfg.method {
        AttackId::Fgsm | AttackId::Bim => bim(net, x, y, cfg),
        AttackId::Rpgd => rpgd(net, x, y, cfg, sample_id),
        AttackId::DeepFool => deepfool(net, x, y, cfg),
        AttackId::CwL2 => cw_l2(net, x, y, cfg),
        AttackId::None => Err(Error::InvalidParameter("`none` is not an attack".into())),
    }
}

/// Attacks every `(sample_id, input, label)` concurrently, in input order.
pub fn run_attack_batch(net: &TinyNet, items: &[(u64, Vec<f64>, usize)], cfg: &AttackConfig) -> Vec<Result<AttackOutcome>> {
    par::map_slice(items, |(id, x, y)| run_attack(net, x, *y, cfg, *id))
}

/// `x + N(0, σ²)` per entry, clipped to `[0, 1]`.
pub fn gaussian_noisy(x: &[f64], sigma: f64, seed: u64) -> Result<Vec<f64>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise sigma must be finite and nonnegative, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(x.to_vec());
    }
    let mut rng = rng_from_seed(seed);
    Ok(x.iter()
        .map(|&v| {
            let e: f64 = rng.sample(StandardNormal);
            (v + sigma * e).clamp(0.0, 1.0)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{Activation, LayerParams, LayerSpec, NetConfig, NetParams, Shape};

    /// Identity hidden layer followed by logits `z_0 = 0`, `z_1 = w·x + b`.
    fn linear_net(w: &[f64], b: f64) -> TinyNet {
        let d = w.len();
        let cfg = NetConfig {
            input: Shape { channels: 1, height: 1, width: d },
            hidden: vec![LayerSpec::Dense { width: d, activation: Activation::Identity }],
            classes: 2,
            capture: None,
        };
        let mut eye = vec![0.0; d * d];
        (0..d).for_each(|i| eye[i * d + i] = 1.0);
        let mut w2 = vec![0.0; d];
        w2.extend_from_slice(w);
        TinyNet::new(
            cfg,
            NetParams {
                layers: vec![
                    LayerParams { weights: eye, bias: vec![0.0; d] },
                    LayerParams { weights: w2, bias: vec![0.0, b] },
                ],
            },
        )
        .unwrap()
    }

    #[test]
    fn fgsm_linear_logit_change() {
        let w = [0.5, -1.5, 2.0, -0.25];
        let net = linear_net(&w, -3.0);
        let x = [0.5; 4];
        assert_eq!(net.predict(&x).unwrap(), 0);
        let eps = 0.1;
        let out = fgsm(&net, &x, 0, eps).unwrap();
        let before = net.forward(&x).unwrap().logits()[1];
        let after = net.forward(&out.adversarial).unwrap().logits()[1];
        let l1: f64 = w.iter().map(|v| v.abs()).sum();
        assert!((after - before - eps * l1).abs() < 1e-12);
    }

    #[test]
    fn zero_eps_is_identity() {
        let net = linear_net(&[1.0, -1.0, 0.5], -1.0);
        let x = [0.2, 0.7, 0.4];
        assert_eq!(fgsm(&net, &x, 0, 0.0).unwrap().adversarial, x.to_vec());
        let cfg = AttackConfig { eps: 0.0, ..AttackConfig::for_method(AttackId::Bim).unwrap() };
        assert_eq!(bim(&net, &x, 0, &cfg).unwrap().adversarial, x.to_vec());
        let cfg = AttackConfig { eps: 0.0, ..AttackConfig::for_method(AttackId::Rpgd).unwrap() };
        assert_eq!(rpgd(&net, &x, 0, &cfg, 3).unwrap().adversarial, x.to_vec());
    }

    #[test]
    fn fgsm_equals_single_step_bim() {
        let net = linear_net(&[1.0, -2.0, 0.3, 0.0], -2.0);
        let x = [0.1, 0.9, 0.5, 0.5];
        let cfg = AttackConfig {
            eps: 0.2,
            stepsize: 0.2,
            iterations: 1,
            eps_search_steps: 0,
            ..AttackConfig::for_method(AttackId::Bim).unwrap()
        };
        assert_eq!(fgsm(&net, &x, 0, 0.2).unwrap(), bim(&net, &x, 0, &cfg).unwrap());
    }

    #[test]
    fn eps_search_finds_linear_minimum() {
        // sign steps move the logit gap by ‖w‖₁ per unit of ℓ∞, so the
        // smallest fooling radius is |f|/‖w‖₁ = 0.1 here
        let w = [0.5, -1.5, 2.0, -0.25];
        let net = linear_net(&w, -0.8);
        let x = [0.5; 4];
        let cfg = AttackConfig::for_method(AttackId::Bim).unwrap();
        let out = bim(&net, &x, 0, &cfg).unwrap();
        assert!(out.success);
        let r = linf_distance(&out.adversarial, &x);
        let slack = cfg.eps / (1u64 << cfg.eps_search_steps) as f64;
        assert!(r >= 0.1 - 1e-12 && r <= 0.1 + slack + 1e-12, "{r}");

        let plain = AttackConfig { return_early: false, eps_search_steps: 0, ..cfg };
        let full = bim(&net, &x, 0, &plain).unwrap();
        assert!((linf_distance(&full.adversarial, &x) - cfg.eps).abs() < 1e-12);
    }

    #[test]
    fn failed_search_returns_last_full_eps_iterate() {
        // gap of 3 needs radius 3/4.25 > 0.3
        let net = linear_net(&[0.5, -1.5, 2.0, -0.25], -3.375);
        let x = [0.5; 4];
        let cfg = AttackConfig::for_method(AttackId::Bim).unwrap();
        let out = bim(&net, &x, 0, &cfg).unwrap();
        assert!(!out.success);
        assert!((linf_distance(&out.adversarial, &x) - cfg.eps).abs() < 1e-12);
    }

    #[test]
    fn deepfool_linear_distance() {
        let w = [0.8, -0.6, 0.3];
        let b = -0.4;
        let net = linear_net(&w, b);
        let x = [0.5, 0.5, 0.5];
        let f = w.iter().zip(&x).map(|(a, c)| a * c).sum::<f64>() + b;
        let cfg = AttackConfig::for_method(AttackId::DeepFool).unwrap();
        let out = deepfool(&net, &x, 0, &cfg).unwrap();
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(out.success);
        assert!((l2_distance(&out.adversarial, &x) - f.abs() / norm * 1.02).abs() < 1e-6);
    }

    #[test]
    fn misclassified_input_rejected() {
        let net = linear_net(&[1.0, 1.0], 0.0);
        let x = [0.5, 0.5];
        assert_eq!(net.predict(&x).unwrap(), 1);
        let cfg = AttackConfig::for_method(AttackId::DeepFool).unwrap();
        assert!(matches!(deepfool(&net, &x, 0, &cfg), Err(Error::Precondition(_))));
        assert!(run_attack(&net, &x, 0, &AttackConfig::for_method(AttackId::Bim).unwrap(), 0).is_err());
    }

    #[test]
    fn cw_finds_boundary_on_linear_model() {
        let w = [1.0, -1.0, 0.5, 0.25];
        let net = linear_net(&w, -0.6);
        let x = [0.5, 0.5, 0.4, 0.4];
        let cfg = AttackConfig::for_method(AttackId::CwL2).unwrap();
        let out = cw_l2(&net, &x, 0, &cfg).unwrap();
        assert!(out.success);
        assert!(out.adversarial.iter().all(|v| (0.0..=1.0).contains(v)));
        let z = net.forward(&out.adversarial).unwrap();
        assert!(z.logits()[1] >= z.logits()[0]);
        let f: f64 = w.iter().zip(&x).map(|(a, c)| a * c).sum::<f64>() - 0.6;
        let min_dist = f.abs() / w.iter().map(|v| v * v).sum::<f64>().sqrt();
        let d = l2_distance(&out.adversarial, &x);
        assert!(d >= min_dist * (1.0 - 1e-6) && d < min_dist * 1.5, "{d} vs {min_dist}");
    }

    #[test]
    fn rpgd_is_seed_deterministic_and_bounded() {
        let net = linear_net(&[1.0, -1.0, 0.5, 0.25, -0.7], -1.2);
        let x = [0.3, 0.6, 0.5, 0.2, 0.9];
        let cfg = AttackConfig::for_method(AttackId::Rpgd).unwrap().with_seed(11);
        let a = rpgd(&net, &x, 0, &cfg, 4).unwrap();
        let b = rpgd(&net, &x, 0, &cfg, 4).unwrap();
        assert_eq!(a, b);
        assert!(linf_distance(&a.adversarial, &x) <= cfg.eps + 1e-9);
        assert!(a.adversarial.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn noise_norm_matches_chi_mean() {
        let d = 4096;
        let x = vec![0.5; d];
        let sigma = 0.01;
        let noisy = gaussian_noisy(&x, sigma, 9).unwrap();
        let ratio = l2_distance(&noisy, &x) / (sigma * (d as f64).sqrt());
        assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
        assert_eq!(gaussian_noisy(&x, 0.0, 9).unwrap(), x);
        assert_eq!(noisy, gaussian_noisy(&x, sigma, 9).unwrap());
        assert!(gaussian_noisy(&x, -1.0, 9).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(AttackConfig::for_method(AttackId::None).is_err());
        let mut cfg = AttackConfig::for_method(AttackId::Bim).unwrap();
        cfg.iterations = 0;
        assert!(cfg.validate().is_err());
        cfg = AttackConfig::for_method(AttackId::Bim).unwrap();
        cfg.eps = -0.1;
        assert!(cfg.validate().is_err());
    }
}
