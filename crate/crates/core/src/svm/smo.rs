//! Sequential minimal optimization for the C-SVC dual
//!
//! ```text
//! min  ½ αᵀQα − eᵀα   s.t.  0 ≤ α ≤ C,  yᵀα = 0,   Q_ij = y_i y_j K_ij
//! ```
//!
//! Pairs are chosen by the maximal-violating index `i` and the second-order
//! gain rule for `j`; iteration stops when `max_{I_up} −y G − min_{I_low} −y G`
//! falls below the tolerance.

const TAU: f64 = 1e-12;

pub(crate) struct SmoOutput {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub kkt_gap: f64,
    pub converged: bool,
    /// Primal-form dual objective `½ αᵀQα − eᵀα` after every update.
    pub objective_trace: Vec<f64>,
}

/// `kernel` is the full row-major `n × n` Gram matrix.
pub(crate) fn solve(kernel: &[f64], y: &[f64], c: f64, tol: f64, max_iter: usize) -> SmoOutput {
    let n = y.len();
    debug_assert_eq!(kernel.len(), n * n);
    let q = |i: usize, j: usize| y[i] * y[j] * kernel[i * n + j];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut kkt_gap;
    let mut converged = false;

    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    loop {
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..n {
            if in_up(alpha[t], y[t]) && (-y[t] * grad[t] > gmax || (i_sel == usize::MAX && -y[t] * grad[t] >= gmax)) {
                gmax = -y[t] * grad[t];
                i_sel = t;
            }
        }
        let mut gmin = f64::INFINITY;
        let mut j_sel = usize::MAX;
        let mut best_gain = f64::INFINITY;
        for t in 0..n {
            if !in_low(alpha[t], y[t]) {
                continue;
            }
            let v = -y[t] * grad[t];
            gmin = gmin.min(v);
            if i_sel == usize::MAX {
                continue;
            }
            let b = gmax - v;
            if b > 0.0 {
                let mut a = q(i_sel, i_sel) + q(t, t) - 2.0 * y[i_sel] * y[t] * q(i_sel, t);
                if a <= 0.0 {
                    a = TAU;
                }
                let gain = -(b * b) / a;
                if gain < best_gain {
                    best_gain = gain;
                    j_sel = t;
                }
            }
        }
        kkt_gap = if i_sel == usize::MAX || gmin == f64::INFINITY { 0.0 } else { gmax - gmin };
        if kkt_gap < tol || j_sel == usize::MAX {
            converged = true;
            break;
        }
        if iterations >= max_iter {
            break;
        }
        iterations += 1;

        let (i, j) = (i_sel, j_sel);
        let (old_ai, old_aj) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (dai, daj) = (alpha[i] - old_ai, alpha[j] - old_aj);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(t, i) * dai + q(t, j) * daj;
        }
        // f = ½ αᵀQα − eᵀα = ½ Σ α_t (G_t − 1)
        trace.push(0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>());
    }

    SmoOutput { rho: compute_rho(&alpha, &grad, y, c), alpha, iterations, kkt_gap, converged, objective_trace: trace }
}

fn compute_rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..y.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    if n_free > 0 {
        sum_free / n_free as f64
    } else if ub.is_finite() && lb.is_finite() {
        0.5 * (ub + lb)
    } else if ub.is_finite() {
        ub
    } else if lb.is_finite() {
        lb
    } else {
        0.0
    }
}

/// Largest per-point KKT violation for decision `f(x_t) = Σ α_k y_k K_tk − ρ`.
pub(crate) fn max_kkt_violation(kernel: &[f64], y: &[f64], alpha: &[f64], rho: f64, c: f64) -> f64 {
    let n = y.len();
    let mut worst: f64 = 0.0;
    for t in 0..n {
        let f: f64 = (0..n).map(|k| alpha[k] * y[k] * kernel[t * n + k]).sum::<f64>() - rho;
        let margin = y[t] * f - 1.0;
        if alpha[t] < c {
            worst = worst.max(-margin);
        }
        if alpha[t] > 0.0 {
            worst = worst.max(margin);
        }
    }
    worst
}
