//! A small feed-forward classifier (valid 2-D convolutions and dense layers)
//! with per-layer response capture, exact input gradients and minibatch SGD.
//!
//! Tensors are flat `Vec<f64>` in channel-major `(c, h, w)` order.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }

    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum LayerSpec {
    Conv { out_channels: usize, kernel: usize, stride: usize, activation: Activation },
    Dense { width: usize, activation: Activation },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl Shape {
    pub fn len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Architecture: hidden layers, then a dense layer over `classes` and softmax.
///
/// Response stages are numbered `0..hidden.len()` for the hidden
/// post-activation outputs, `hidden.len()` for the logits and
/// `hidden.len() + 1` for the softmax. `capture` selects stages; `None`
/// captures all of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetConfig {
    pub input: Shape,
    pub hidden: Vec<LayerSpec>,
    pub classes: usize,
    #[serde(default)]
    pub capture: Option<Vec<usize>>,
}

impl NetConfig {
    /// conv(8, 3×3) – conv(16, 3×3) – dense(32) – dense(classes), ReLU hidden.
    pub fn desk(classes: usize) -> Self {
        Self {
            input: Shape { channels: 1, height: 8, width: 8 },
            hidden: vec![
                LayerSpec::Conv { out_channels: 8, kernel: 3, stride: 1, activation: Activation::Relu },
                LayerSpec::Conv { out_channels: 16, kernel: 3, stride: 1, activation: Activation::Relu },
                LayerSpec::Dense { width: 32, activation: Activation::Relu },
            ],
            classes,
            capture: None,
        }
    }

    pub fn stage_count(&self) -> usize {
        self.hidden.len() + 2
    }

    pub fn captured_stages(&self) -> Vec<usize> {
        self.capture.clone().unwrap_or_else(|| (0..self.stage_count()).collect())
    }

    fn resolve(&self) -> Result<Vec<Layer>> {
        if self.hidden.is_empty() {
            return Err(Error::InvalidParameter("network needs at least one hidden layer".into()));
        }
        if self.classes < 2 {
            return Err(Error::InvalidParameter("network needs at least two classes".into()));
        }
        if self.input.is_empty() {
            return Err(Error::InvalidParameter("input shape is empty".into()));
        }
        if let Some(cap) = &self.capture {
            if cap.is_empty() || cap.iter().any(|&s| s >= self.stage_count()) {
                return Err(Error::InvalidParameter(format!("invalid capture list {cap:?}")));
            }
        }
        let mut shape = self.input;
        let mut layers = Vec::with_capacity(self.hidden.len() + 1);
        let last = LayerSpec::Dense { width: self.classes, activation: Activation::Identity };
        for spec in self.hidden.iter().chain(std::iter::once(&last)) {
            let (kind, out, activation) = match *spec {
                LayerSpec::Conv { out_channels, kernel, stride, activation } => {
                    if out_channels == 0 || kernel == 0 || stride == 0 {
                        return Err(Error::InvalidParameter("conv sizes must be positive".into()));
                    }
                    if kernel > shape.height || kernel > shape.width {
                        return Err(Error::InvalidParameter(format!(
                            "kernel {kernel} exceeds input {}x{}",
                            shape.height, shape.width
                        )));
                    }
                    let out = Shape {
                        channels: out_channels,
                        height: (shape.height - kernel) / stride + 1,
                        width: (shape.width - kernel) / stride + 1,
                    };
                    (LayerKind::Conv { kernel, stride }, out, activation)
                }
                LayerSpec::Dense { width, activation } => {
                    if width == 0 {
                        return Err(Error::InvalidParameter("dense width must be positive".into()));
                    }
                    (LayerKind::Dense, Shape { channels: width, height: 1, width: 1 }, activation)
                }
            };
            layers.push(Layer { kind, input: shape, output: out, activation });
            shape = out;
        }
        Ok(layers)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum LayerKind {
    Conv { kernel: usize, stride: usize },
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Layer {
    kind: LayerKind,
    input: Shape,
    output: Shape,
    activation: Activation,
}

impl Layer {
    fn weight_len(&self) -> usize {
        match self.kind {
            LayerKind::Conv { kernel, .. } => self.output.channels * self.input.channels * kernel * kernel,
            LayerKind::Dense => self.output.len() * self.input.len(),
        }
    }

    fn bias_len(&self) -> usize {
        self.output.channels
    }

    fn fan_in(&self) -> usize {
        match self.kind {
            LayerKind::Conv { kernel, .. } => self.input.channels * kernel * kernel,
            LayerKind::Dense => self.input.len(),
        }
    }

    fn forward(&self, p: &LayerParams, x: &[f64]) -> Vec<f64> {
        match self.kind {
            LayerKind::Dense => {
                let n_in = self.input.len();
                p.bias
                    .iter()
                    .enumerate()
                    .map(|(o, b)| b + dot(&p.weights[o * n_in..(o + 1) * n_in], x))
                    .collect()
            }
            LayerKind::Conv { kernel, stride } => {
                let (ic_n, ih, iw) = (self.input.channels, self.input.height, self.input.width);
                let (oc_n, oh, ow) = (self.output.channels, self.output.height, self.output.width);
                let mut out = vec![0.0; self.output.len()];
                for oc in 0..oc_n {
                    for oy in 0..oh {
                        for ox in 0..ow {
                            let mut acc = p.bias[oc];
                            for ic in 0..ic_n {
                                for ky in 0..kernel {
                                    let row = (ic * ih + oy * stride + ky) * iw + ox * stride;
                                    let w = ((oc * ic_n + ic) * kernel + ky) * kernel;
                                    acc += dot(&p.weights[w..w + kernel], &x[row..row + kernel]);
                                }
                            }
                            out[(oc * oh + oy) * ow + ox] = acc;
                        }
                    }
                }
                out
            }
        }
    }

    /// Accumulates parameter gradients (when `grads` is given) and returns
    /// the gradient with respect to the layer input.
    fn backward(&self, p: &LayerParams, x: &[f64], dz: &[f64], grads: Option<&mut LayerParams>) -> Vec<f64> {
        let mut dx = vec![0.0; self.input.len()];
        match self.kind {
            LayerKind::Dense => {
                let n_in = self.input.len();
                for (o, &g) in dz.iter().enumerate() {
                    let row = &p.weights[o * n_in..(o + 1) * n_in];
                    for (d, w) in dx.iter_mut().zip(row) {
                        *d += g * w;
                    }
                }
                if let Some(gp) = grads {
                    for (o, &g) in dz.iter().enumerate() {
                        gp.bias[o] += g;
                        for (gw, xi) in gp.weights[o * n_in..(o + 1) * n_in].iter_mut().zip(x) {
                            *gw += g * xi;
                        }
                    }
                }
            }
            LayerKind::Conv { kernel, stride } => {
                let (ic_n, ih, iw) = (self.input.channels, self.input.height, self.input.width);
                let (oc_n, oh, ow) = (self.output.channels, self.output.height, self.output.width);
                let mut grads = grads;
                for oc in 0..oc_n {
                    for oy in 0..oh {
                        for ox in 0..ow {
                            let g = dz[(oc * oh + oy) * ow + ox];
                            if g == 0.0 {
                                continue;
                            }
                            if let Some(gp) = grads.as_deref_mut() {
                                gp.bias[oc] += g;
                            }
                            for ic in 0..ic_n {
                                for ky in 0..kernel {
                                    let row = (ic * ih + oy * stride + ky) * iw + ox * stride;
                                    let w = ((oc * ic_n + ic) * kernel + ky) * kernel;
                                    for kx in 0..kernel {
                                        dx[row + kx] += g * p.weights[w + kx];
                                    }
                                    if let Some(gp) = grads.as_deref_mut() {
                                        for kx in 0..kernel {
                                            gp.weights[w + kx] += g * x[row + kx];
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        dx
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetParams {
    pub layers: Vec<LayerParams>,
}

impl NetParams {
    fn zeros_like(layers: &[Layer]) -> Self {
        Self {
            layers: layers
                .iter()
                .map(|l| LayerParams { weights: vec![0.0; l.weight_len()], bias: vec![0.0; l.bias_len()] })
                .collect(),
        }
    }

    fn add_assign(&mut self, other: &NetParams) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights.iter_mut().zip(&b.weights).for_each(|(x, y)| *x += y);
            a.bias.iter_mut().zip(&b.bias).for_each(|(x, y)| *x += y);
        }
    }
}

/// Intermediate values of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// Input of each layer; the last entry is the logits.
    inputs: Vec<Vec<f64>>,
    pre_activations: Vec<Vec<f64>>,
    pub probabilities: Vec<f64>,
}

impl ForwardPass {
    pub fn logits(&self) -> &[f64] {
        self.inputs.last().expect("nonempty")
    }

    pub fn predicted(&self) -> usize {
        argmax(&self.probabilities)
    }
}

pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Loss whose input gradient drives the attacks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    /// `-ln softmax(z)_t`
    CrossEntropy,
    /// `z_t - max_{j≠t} z_j`
    LogitDiff,
}

/// One labelled input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub input: Vec<f64>,
    pub label: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub momentum: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 30, lr: 0.05, batch_size: 32, momentum: 0.9, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean cross-entropy over each epoch's minibatch updates.
    pub epoch_loss: Vec<f64>,
    /// Mean loss of each minibatch of the first epoch.
    pub first_epoch_batch_loss: Vec<f64>,
    pub train_accuracy: f64,
}

/// Network with validated architecture and parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TinyNet {
    config: NetConfig,
    layers: Vec<Layer>,
    params: NetParams,
}

impl TinyNet {
    pub fn new(config: NetConfig, params: NetParams) -> Result<Self> {
        let layers = config.resolve()?;
        if params.layers.len() != layers.len() {
            return Err(Error::DimensionMismatch { expected: layers.len(), found: params.layers.len() });
        }
        for (l, p) in layers.iter().zip(&params.layers) {
            if p.weights.len() != l.weight_len() {
                return Err(Error::DimensionMismatch { expected: l.weight_len(), found: p.weights.len() });
            }
            if p.bias.len() != l.bias_len() {
                return Err(Error::DimensionMismatch { expected: l.bias_len(), found: p.bias.len() });
            }
            if p.weights.iter().chain(&p.bias).any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("network parameters must be finite".into()));
            }
        }
        Ok(Self { config, layers, params })
    }

    /// Fan-in scaled uniform initialization.
    pub fn init(config: NetConfig, seed: u64) -> Result<Self> {
        let layers = config.resolve()?;
        let mut rng = rng_from_seed(seed);
        let mut params = NetParams::zeros_like(&layers);
        for (l, p) in layers.iter().zip(params.layers.iter_mut()) {
            let gain = if l.activation == Activation::Relu { 6.0 } else { 3.0 };
            let bound = (gain / l.fan_in() as f64).sqrt();
            p.weights.iter_mut().for_each(|w| *w = rng.random_range(-bound..bound));
        }
        Ok(Self { config, layers, params })
    }

    /// All-zero parameters.
    pub fn zeros(config: NetConfig) -> Result<Self> {
        let layers = config.resolve()?;
        let params = NetParams::zeros_like(&layers);
        Ok(Self { config, layers, params })
    }

    pub fn config(&self) -> &NetConfig {
        &self.config
    }

    pub fn params(&self) -> &NetParams {
        &self.params
    }

    pub fn input_len(&self) -> usize {
        self.config.input.len()
    }

    pub fn classes(&self) -> usize {
        self.config.classes
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_len() {
            return Err(Error::DimensionMismatch { expected: self.input_len(), found: x.len() });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<ForwardPass> {
        self.check_input(x)?;
        let mut inputs = Vec::with_capacity(self.layers.len() + 1);
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        inputs.push(x.to_vec());
        for (layer, p) in self.layers.iter().zip(&self.params.layers) {
            let z = layer.forward(p, inputs.last().expect("nonempty"));
            let a = z.iter().map(|&v| layer.activation.apply(v)).collect();
            pre_activations.push(z);
            inputs.push(a);
        }
        let probabilities = softmax(inputs.last().expect("nonempty"));
        Ok(ForwardPass { inputs, pre_activations, probabilities })
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(self.forward(x)?.predicted())
    }

    /// Class posteriors and the captured per-stage responses, each flattened.
    pub fn forward_with_responses(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let pass = self.forward(x)?;
        let responses = self
            .config
            .captured_stages()
            .into_iter()
            .map(|s| if s < self.layers.len() { pass.inputs[s + 1].clone() } else { pass.probabilities.clone() })
            .collect();
        Ok((pass.probabilities, responses))
    }

    fn backward(&self, pass: &ForwardPass, dlogits: &[f64], mut grads: Option<&mut NetParams>) -> Vec<f64> {
        let mut delta = dlogits.to_vec();
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            for (d, &z) in delta.iter_mut().zip(&pass.pre_activations[l]) {
                *d *= layer.activation.derivative(z);
            }
            let g = grads.as_deref_mut().map(|g| &mut g.layers[l]);
            delta = layer.backward(&self.params.layers[l], &pass.inputs[l], &delta, g);
        }
        delta
    }

    /// Gradient of `Σ_k dlogits_k · z_k(x)` with respect to the input.
    pub fn input_gradient_from_logits(&self, pass: &ForwardPass, dlogits: &[f64]) -> Result<Vec<f64>> {
        if dlogits.len() != self.classes() {
            return Err(Error::DimensionMismatch { expected: self.classes(), found: dlogits.len() });
        }
        Ok(self.backward(pass, dlogits, None))
    }

    /// Exact `∂loss/∂x` for the given target class.
    pub fn gradient_input(&self, x: &[f64], target: usize, loss: Loss) -> Result<Vec<f64>> {
        if target >= self.classes() {
            return Err(Error::InvalidParameter(format!("class {target} out of range")));
        }
        let pass = self.forward(x)?;
        let dlogits = loss_logit_gradient(&pass, target, loss);
        Ok(self.backward(&pass, &dlogits, None))
    }

    /// Loss value matching [`TinyNet::gradient_input`].
    pub fn loss(&self, x: &[f64], target: usize, loss: Loss) -> Result<f64> {
        if target >= self.classes() {
            return Err(Error::InvalidParameter(format!("class {target} out of range")));
        }
        let pass = self.forward(x)?;
        Ok(match loss {
            Loss::CrossEntropy => cross_entropy(pass.logits(), target),
            Loss::LogitDiff => {
                let z = pass.logits();
                z[target] - max_other(z, target).1
            }
        })
    }

    /// Minibatch SGD with momentum on cross-entropy, starting from the
    /// current parameters.
    pub fn train(&mut self, data: &[Example], cfg: &TrainConfig) -> Result<TrainReport> {
        if data.is_empty() {
            return Err(Error::Empty("training set is empty"));
        }
        for ex in data {
            self.check_input(&ex.input)?;
            if ex.label >= self.classes() {
                return Err(Error::InvalidParameter(format!("label {} out of range", ex.label)));
            }
        }
        if cfg.batch_size == 0 {
            return Err(Error::InvalidParameter("batch size must be positive".into()));
        }
        let mut rng = rng_from_seed(cfg.seed);
        let mut velocity = NetParams::zeros_like(&self.layers);
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut epoch_loss = Vec::with_capacity(cfg.epochs);
        let mut first_epoch_batch_loss = Vec::new();
        for epoch in 0..cfg.epochs {
            order.shuffle(&mut rng);
            let mut loss_sum = 0.0;
            for batch in order.chunks(cfg.batch_size) {
                let per_example = par::map_slice(batch, |&i| {
                    let mut g = NetParams::zeros_like(&self.layers);
                    let pass = self.forward(&data[i].input).expect("validated input");
                    let loss = cross_entropy(pass.logits(), data[i].label);
                    let dlogits = loss_logit_gradient(&pass, data[i].label, Loss::CrossEntropy);
                    self.backward(&pass, &dlogits, Some(&mut g));
                    (g, loss)
                });
                let mut total = NetParams::zeros_like(&self.layers);
                let mut batch_loss = 0.0;
                for (g, l) in &per_example {
                    total.add_assign(g);
                    batch_loss += l;
                }
                let scale = cfg.lr / batch.len() as f64;
                for ((p, v), g) in self.params.layers.iter_mut().zip(velocity.layers.iter_mut()).zip(&total.layers) {
                    for ((w, vw), gw) in p.weights.iter_mut().zip(v.weights.iter_mut()).zip(&g.weights) {
                        *vw = cfg.momentum * *vw - scale * gw;
                        *w += *vw;
                    }
                    for ((b, vb), gb) in p.bias.iter_mut().zip(v.bias.iter_mut()).zip(&g.bias) {
                        *vb = cfg.momentum * *vb - scale * gb;
                        *b += *vb;
                    }
                }
                if epoch == 0 {
                    first_epoch_batch_loss.push(batch_loss / batch.len() as f64);
                }
                loss_sum += batch_loss;
            }
            epoch_loss.push(loss_sum / data.len() as f64);
        }
        Ok(TrainReport { epoch_loss, first_epoch_batch_loss, train_accuracy: self.accuracy(data)? })
    }

    pub fn accuracy(&self, data: &[Example]) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::Empty("no examples"));
        }
        let correct = par::map_slice(data, |ex| self.predict(&ex.input).map(|p| p == ex.label))
            .into_iter()
            .collect::<Result<Vec<bool>>>()?
            .into_iter()
            .filter(|&c| c)
            .count();
        Ok(correct as f64 / data.len() as f64)
    }
}

/// Initializes from `train.seed` and trains.
pub fn train_net(config: NetConfig, data: &[Example], train: &TrainConfig) -> Result<(TinyNet, TrainReport)> {
    let mut net = TinyNet::init(config, train.seed)?;
    let report = net.train(data, train)?;
    Ok((net, report))
}

fn cross_entropy(z: &[f64], target: usize) -> f64 {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
    lse - z[target]
}

/// Index and value of the largest logit other than `target`.
pub fn max_other(z: &[f64], target: usize) -> (usize, f64) {
    let mut best = (usize::MAX, f64::NEG_INFINITY);
    for (j, &v) in z.iter().enumerate() {
        if j != target && v > best.1 {
            best = (j, v);
        }
    }
    best
}

fn loss_logit_gradient(pass: &ForwardPass, target: usize, loss: Loss) -> Vec<f64> {
    match loss {
        Loss::CrossEntropy => {
            let mut g = pass.probabilities.clone();
            g[target] -= 1.0;
            g
        }
        Loss::LogitDiff => {
            let mut g = vec![0.0; pass.probabilities.len()];
            g[target] = 1.0;
            g[max_other(pass.logits(), target).0] -= 1.0;
            g
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::child_rng;

    fn linear_config(inputs: usize, classes: usize) -> NetConfig {
        NetConfig {
            input: Shape { channels: 1, height: 1, width: inputs },
            hidden: vec![LayerSpec::Dense { width: inputs, activation: Activation::Identity }],
            classes,
            capture: None,
        }
    }

    fn small_conv_config() -> NetConfig {
        NetConfig {
            input: Shape { channels: 2, height: 6, width: 6 },
            hidden: vec![
                LayerSpec::Conv { out_channels: 3, kernel: 3, stride: 1, activation: Activation::Relu },
                LayerSpec::Conv { out_channels: 2, kernel: 2, stride: 2, activation: Activation::Relu },
                LayerSpec::Dense { width: 5, activation: Activation::Relu },
            ],
            classes: 4,
            capture: None,
        }
    }

    #[test]
    fn zero_net_is_uniform() {
        let net = TinyNet::zeros(NetConfig::desk(10)).unwrap();
        let (p, layers) = net.forward_with_responses(&[0.3; 64]).unwrap();
        assert!(p.iter().all(|&v| (v - 0.1).abs() < 1e-15));
        assert_eq!(layers.len(), 5);
        assert_eq!(layers.iter().map(Vec::len).collect::<Vec<_>>(), vec![288, 256, 32, 10, 10]);
        let g = net.gradient_input(&[0.3; 64], 2, Loss::CrossEntropy).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn capture_list_controls_layers() {
        let mut cfg = NetConfig::desk(10);
        cfg.capture = Some(vec![1, 4]);
        let net = TinyNet::init(cfg, 1).unwrap();
        let (_, layers) = net.forward_with_responses(&[0.5; 64]).unwrap();
        assert_eq!(layers.len(), 2);
        assert_eq!(layers[0].len(), 256);
        let mut bad = NetConfig::desk(10);
        bad.capture = Some(vec![5]);
        assert!(TinyNet::init(bad, 1).is_err());
    }

    #[test]
    fn softmax_normalized_and_deterministic() {
        let net = TinyNet::init(small_conv_config(), 3).unwrap();
        let mut rng = child_rng(3, 1);
        for _ in 0..20 {
            let x: Vec<f64> = (0..72).map(|_| rng.random::<f64>()).collect();
            let a = net.forward(&x).unwrap();
            let s: f64 = a.probabilities.iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
            assert!(a.probabilities.iter().all(|&p| p > 0.0));
            let b = net.forward(&x).unwrap();
            assert_eq!(a.probabilities, b.probabilities);
        }
        assert!(net.forward(&[0.0; 71]).is_err());
    }

    #[test]
    fn conv_matches_nested_loop_reference() {
        let cfg = NetConfig {
            input: Shape { channels: 2, height: 6, width: 6 },
            hidden: vec![LayerSpec::Conv { out_channels: 3, kernel: 3, stride: 1, activation: Activation::Identity }],
            classes: 2,
            capture: Some(vec![0]),
        };
        let net = TinyNet::init(cfg, 8).unwrap();
        let mut rng = child_rng(8, 2);
        let x: Vec<f64> = (0..72).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (_, layers) = net.forward_with_responses(&x).unwrap();
        let p = &net.params().layers[0];
        for oc in 0..3 {
            for oy in 0..4 {
                for ox in 0..4 {
                    let mut acc = p.bias[oc];
                    for ic in 0..2 {
                        for ky in 0..3 {
                            for kx in 0..3 {
                                acc += p.weights[oc * 18 + ic * 9 + ky * 3 + kx] * x[ic * 36 + (oy + ky) * 6 + ox + kx];
                            }
                        }
                    }
                    assert!((layers[0][oc * 16 + oy * 4 + ox] - acc).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let h = 1e-4;
        for seed in 0..5u64 {
            let net = TinyNet::init(small_conv_config(), seed).unwrap();
            let mut rng = child_rng(seed, 99);
            let x: Vec<f64> = (0..72).map(|_| rng.random::<f64>()).collect();
            for loss in [Loss::CrossEntropy, Loss::LogitDiff] {
                let g = net.gradient_input(&x, 1, loss).unwrap();
                for _ in 0..20 {
                    let i = rng.random_range(0..72);
                    let (mut xp, mut xm) = (x.clone(), x.clone());
                    xp[i] += h;
                    xm[i] -= h;
                    let fd = (net.loss(&xp, 1, loss).unwrap() - net.loss(&xm, 1, loss).unwrap()) / (2.0 * h);
                    let scale = g[i].abs().max(fd.abs()).max(1e-8);
                    assert!((g[i] - fd).abs() / scale < 1e-4 || (g[i] - fd).abs() < 1e-9, "{} vs {}", g[i], fd);
                }
            }
        }
    }

    #[test]
    fn logit_diff_gradient_linear_in_last_layer() {
        // Identity hidden layer: z = W2 (W1 x + b1) + b2, so ∂(z_0 - z_1)/∂x = (W2_0 - W2_1) W1.
        let net = TinyNet::init(linear_config(3, 2), 4).unwrap();
        let x = [0.2, -0.4, 0.9];
        let g = net.gradient_input(&x, 0, Loss::LogitDiff).unwrap();
        let w1 = &net.params().layers[0].weights;
        let w2 = &net.params().layers[1].weights;
        for i in 0..3 {
            let expect: f64 = (0..3).map(|k| (w2[k] - w2[3 + k]) * w1[k * 3 + i]).sum();
            assert!((g[i] - expect).abs() < 1e-12);
        }
        assert!(net.gradient_input(&x, 2, Loss::LogitDiff).is_err());
    }

    fn blobs(n: usize, seed: u64) -> Vec<Example> {
        use rand_distr::{Distribution, Normal};
        let mut rng = child_rng(seed, 0);
        let noise = Normal::new(0.0, 0.5).unwrap();
        (0..n)
            .map(|i| {
                let label = i % 2;
                let centre = if label == 0 { -1.5 } else { 1.5 };
                Example {
                    input: vec![centre + noise.sample(&mut rng), centre + noise.sample(&mut rng)],
                    label,
                }
            })
            .collect()
    }

    fn blob_config() -> NetConfig {
        NetConfig {
            input: Shape { channels: 1, height: 1, width: 2 },
            hidden: vec![LayerSpec::Dense { width: 8, activation: Activation::Relu }],
            classes: 2,
            capture: None,
        }
    }

    #[test]
    fn trains_on_separable_blobs() {
        let data = blobs(200, 5);
        let cfg = TrainConfig { epochs: 50, lr: 0.05, batch_size: 16, momentum: 0.9, seed: 5 };
        let (_, report) = train_net(blob_config(), &data, &cfg).unwrap();
        assert!(report.train_accuracy >= 0.99, "{report:?}");
        assert!(report.epoch_loss.iter().all(|l| l.is_finite()));
        assert!(report.epoch_loss.last().unwrap() < &report.epoch_loss[0]);
    }

    #[test]
    fn first_epoch_loss_trends_down() {
        let data = blobs(200, 6);
        let cfg = TrainConfig { epochs: 1, lr: 0.05, batch_size: 20, momentum: 0.0, seed: 6 };
        let (_, report) = train_net(blob_config(), &data, &cfg).unwrap();
        let b = &report.first_epoch_batch_loss;
        let half = b.len() / 2;
        let early = b[..half].iter().sum::<f64>() / half as f64;
        let late = b[half..].iter().sum::<f64>() / (b.len() - half) as f64;
        assert!(late <= early, "{b:?}");
    }

    #[test]
    fn zero_learning_rate_keeps_params() {
        let data = blobs(40, 7);
        let mut net = TinyNet::init(blob_config(), 7).unwrap();
        let before = net.params().clone();
        net.train(&data, &TrainConfig { epochs: 3, lr: 0.0, ..Default::default() }).unwrap();
        assert_eq!(&before, net.params());
        assert!(net.train(&[], &TrainConfig::default()).is_err());
        let bad = vec![Example { input: vec![0.0, 0.0], label: 2 }];
        assert!(net.train(&bad, &TrainConfig::default()).is_err());
    }
}
