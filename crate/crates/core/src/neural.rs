//! Fully connected multi-layer perceptron with backpropagation.
//!
//! Used twice: as an autoassociative network (targets are the inputs) and as
//! the decision model mapping features to a decision. Loss is always the
//! mean over rows of `½‖f(x) − y‖²`; training is plain mini-batch gradient
//! descent.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Sigmoid,
    Linear,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Linear => z,
        }
    }

    /// Derivative expressed through the activation output `y`.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Linear => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    /// `outputs × inputs`, row-major.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    fn forward_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.weights
                .chunks_exact(self.inputs)
                .zip(&self.biases)
                .map(|(row, b)| {
                    let z = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b;
                    self.activation.apply(z)
                }),
        );
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    layers: Vec<Layer>,
}

impl MlpParams {
    /// Assemble from explicit layers, checking that shapes chain and values are finite.
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidConfig("network needs at least one layer".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.inputs == 0 || l.outputs == 0 {
                return Err(Error::InvalidConfig(format!("layer {i} has a zero dimension")));
            }
            if l.weights.len() != l.inputs * l.outputs || l.biases.len() != l.outputs {
                return Err(Error::ShapeMismatch {
                    context: "layer parameters",
                    expected: l.inputs * l.outputs + l.outputs,
                    found: l.weights.len() + l.biases.len(),
                });
            }
            if i > 0 && layers[i - 1].outputs != l.inputs {
                return Err(Error::ShapeMismatch {
                    context: "layer chaining",
                    expected: layers[i - 1].outputs,
                    found: l.inputs,
                });
            }
            if l.weights.iter().chain(&l.biases).any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("layer {i} holds non-finite parameters")));
            }
        }
        Ok(MlpParams { layers })
    }

    /// All-zero network: `hidden` between hidden layers, `output` on the last.
    pub fn zeros(layer_sizes: &[usize], hidden: Activation, output: Activation) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::InvalidConfig(
                "layer_sizes needs an input and an output size".into(),
            ));
        }
        let last = layer_sizes.len() - 2;
        let layers = layer_sizes
            .windows(2)
            .enumerate()
            .map(|(i, w)| Layer {
                inputs: w[0],
                outputs: w[1],
                weights: vec![0.0; w[0] * w[1]],
                biases: vec![0.0; w[1]],
                activation: if i == last { output } else { hidden },
            })
            .collect();
        MlpParams::from_layers(layers)
    }

    /// Weights and biases drawn from `Uniform(-init_scale, init_scale)`.
    pub fn init_uniform(
        layer_sizes: &[usize],
        hidden: Activation,
        output: Activation,
        init_scale: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(init_scale > 0.0 && init_scale.is_finite()) {
            return Err(Error::InvalidConfig(format!("init_scale must be positive, got {init_scale}")));
        }
        let mut net = MlpParams::zeros(layer_sizes, hidden, output)?;
        let mut rng = seed::rng(seed);
        for l in &mut net.layers {
            for v in l.weights.iter_mut().chain(l.biases.iter_mut()) {
                *v = rng.random_range(-init_scale..=init_scale);
            }
        }
        Ok(net)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].inputs)
            .chain(self.layers.iter().map(|l| l.outputs))
            .collect()
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_size(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Parameters flattened layer by layer: weights then biases.
    pub fn flat_params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
            .collect()
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::ShapeMismatch {
                context: "flat parameter vector",
                expected: self.param_count(),
                found: flat.len(),
            });
        }
        let mut it = flat.iter().copied();
        for l in &mut self.layers {
            for v in l.weights.iter_mut().chain(l.biases.iter_mut()) {
                *v = it.next().unwrap();
            }
        }
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_size() {
            return Err(Error::ShapeMismatch {
                context: "network input",
                expected: self.input_size(),
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        for l in &self.layers {
            l.forward_into(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Activations of every layer, input first.
    fn forward_trace(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        for l in &self.layers {
            let mut out = Vec::with_capacity(l.outputs);
            l.forward_into(acts.last().unwrap(), &mut out);
            acts.push(out);
        }
        acts
    }

    fn check_batch(&self, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Result<()> {
        if xs.len() != ys.len() {
            return Err(Error::ShapeMismatch {
                context: "row count of inputs vs targets",
                expected: xs.len(),
                found: ys.len(),
            });
        }
        if xs.is_empty() {
            return Err(Error::InvalidInput("no training rows".into()));
        }
        for (x, y) in xs.iter().zip(ys) {
            self.check_input(x)?;
            if y.len() != self.output_size() {
                return Err(Error::ShapeMismatch {
                    context: "target width",
                    expected: self.output_size(),
                    found: y.len(),
                });
            }
        }
        Ok(())
    }

    /// Mean over rows of `½‖forward(x) − y‖²`.
    pub fn loss(&self, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Result<f64> {
        self.check_batch(xs, ys)?;
        let mut total = 0.0;
        for (x, y) in xs.iter().zip(ys) {
            let out = self.forward(x)?;
            total += 0.5 * out.iter().zip(y).map(|(o, t)| (o - t) * (o - t)).sum::<f64>();
        }
        Ok(total / xs.len() as f64)
    }

    /// Analytic gradient of [`MlpParams::loss`] by backpropagation.
    pub fn gradient(&self, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Result<Gradient> {
        self.check_batch(xs, ys)?;
        let mut grad = Gradient::zeros_like(self);
        let scale = 1.0 / xs.len() as f64;
        for (x, y) in xs.iter().zip(ys) {
            let acts = self.forward_trace(x);
            let last = self.layers.len() - 1;
            let mut delta: Vec<f64> = acts[last + 1]
                .iter()
                .zip(y)
                .map(|(&o, &t)| (o - t) * self.layers[last].activation.derivative_from_output(o))
                .collect();
            for li in (0..self.layers.len()).rev() {
                let layer = &self.layers[li];
                let input = &acts[li];
                let gw = &mut grad.weights[li];
                for (o, &d) in delta.iter().enumerate() {
                    grad.biases[li][o] += scale * d;
                    for (i, &a) in input.iter().enumerate() {
                        gw[o * layer.inputs + i] += scale * d * a;
                    }
                }
                if li > 0 {
                    let act = self.layers[li - 1].activation;
                    delta = (0..layer.inputs)
                        .map(|i| {
                            let back: f64 = delta
                                .iter()
                                .enumerate()
                                .map(|(o, d)| layer.weights[o * layer.inputs + i] * d)
                                .sum();
                            back * act.derivative_from_output(input[i])
                        })
                        .collect();
                }
            }
        }
        Ok(grad)
    }

    fn apply_step(&mut self, grad: &Gradient, learning_rate: f64) {
        for (li, l) in self.layers.iter_mut().enumerate() {
            for (w, g) in l.weights.iter_mut().zip(&grad.weights[li]) {
                *w -= learning_rate * g;
            }
            for (b, g) in l.biases.iter_mut().zip(&grad.biases[li]) {
                *b -= learning_rate * g;
            }
        }
    }
}

/// Parameter-shaped gradient: one weight and one bias vector per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradient {
    fn zeros_like(net: &MlpParams) -> Self {
        Gradient {
            weights: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            biases: net.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }

    /// Same ordering as [`MlpParams::flat_params`].
    pub fn flatten(&self) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| w.iter().chain(b).copied())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Upper bound on the mini-batch size; clamped to the number of rows.
    pub batch_size: usize,
    pub seed: u64,
    pub init_scale: f64,
    /// Stop once the epoch-loss improvement drops below this; 0 disables.
    pub early_stop_tol: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.5,
            epochs: 2000,
            batch_size: 16,
            seed: 0,
            init_scale: 0.5,
            early_stop_tol: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning_rate must be non-negative, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidConfig("epochs and batch_size must be positive".into()));
        }
        if !(self.init_scale > 0.0 && self.init_scale.is_finite()) {
            return Err(Error::InvalidConfig("init_scale must be positive".into()));
        }
        if !(self.early_stop_tol >= 0.0) {
            return Err(Error::InvalidConfig("early_stop_tol must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub loss_trace: Vec<f64>,
    pub final_loss: f64,
    pub epochs_run: usize,
}

/// Mini-batch gradient descent. Row order is reshuffled every epoch from
/// a stream derived from `cfg.seed`; the trace records full-data loss after
/// each epoch.
pub fn train(
    net: &MlpParams,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    cfg: &TrainConfig,
) -> Result<(MlpParams, TrainReport)> {
    cfg.validate()?;
    net.check_batch(xs, ys)?;
    let mut net = net.clone();
    let mut rng = seed::rng(seed::derive(cfg.seed, 0x5348_5546));
    let batch = cfg.batch_size.min(xs.len());
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);
    let mut bx = Vec::with_capacity(batch);
    let mut by = Vec::with_capacity(batch);
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            bx.clear();
            by.clear();
            bx.extend(chunk.iter().map(|&i| xs[i].clone()));
            by.extend(chunk.iter().map(|&i| ys[i].clone()));
            let g = net.gradient(&bx, &by)?;
            net.apply_step(&g, cfg.learning_rate);
        }
        let loss = net.loss(xs, ys)?;
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        let improvement = trace.last().map(|prev: &f64| prev - loss);
        trace.push(loss);
        if cfg.early_stop_tol > 0.0 && improvement.is_some_and(|d| d < cfg.early_stop_tol) {
            break;
        }
    }
    let report = TrainReport {
        final_loss: *trace.last().unwrap(),
        epochs_run: trace.len(),
        loss_trace: trace,
    };
    Ok((net, report))
}

/// `max(2, round(0.75 · inputs))`.
pub fn default_hidden_size(inputs: usize) -> usize {
    ((0.75 * inputs as f64).round() as usize).max(2)
}

/// Train an `n → hidden → n` network (tanh hidden, sigmoid output) to
/// reproduce its own input. Rows must be fully observed and scaled to `[0, 1]`.
pub fn train_autoassociative(
    xs: &[Vec<f64>],
    cfg: &TrainConfig,
    hidden_size: usize,
) -> Result<(MlpParams, TrainReport)> {
    let n = xs.first().map(Vec::len).ok_or_else(|| Error::InvalidInput("no training rows".into()))?;
    if hidden_size == 0 {
        return Err(Error::InvalidConfig("hidden_size must be positive".into()));
    }
    if xs.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidInput(
            "autoassociative training data must be normalized to [0, 1]".into(),
        ));
    }
    let net = MlpParams::init_uniform(
        &[n, hidden_size, n],
        Activation::Tanh,
        Activation::Sigmoid,
        cfg.init_scale,
        cfg.seed,
    )?;
    train(&net, xs, xs, cfg)
}
