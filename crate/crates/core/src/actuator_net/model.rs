use rand::Rng;
use serde::{Deserialize, Serialize};

use super::features::{feature_width, FeatureWindow, Normalization};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Softsign,
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Softsign => x / (1.0 + x.abs()),
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    // Derivative expressed through the pre-activation.
    fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Softsign => {
                let d = 1.0 + x.abs();
                1.0 / (d * d)
            }
            Activation::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Fully connected layer; `weights` is row-major `outputs × inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    // Glorot-uniform weights, zero biases.
    fn glorot<R: Rng>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let weights = (0..inputs * outputs)
            .map(|_| rng.random_range(-limit..limit))
            .collect();
        Self {
            inputs,
            outputs,
            weights,
            biases: vec![0.0; outputs],
        }
    }

    fn forward(&self, x: &[f64], out: &mut [f64]) {
        for (o, (row, b)) in out
            .iter_mut()
            .zip(self.weights.chunks_exact(self.inputs).zip(&self.biases))
        {
            *o = b + row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>();
        }
    }
}

/// Parameter gradients with the same shapes as the model's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<DenseLayer>,
}

impl Gradients {
    pub fn zeros_like(model: &ActuatorNetModel) -> Self {
        Self {
            layers: model
                .layers
                .iter()
                .map(|l| DenseLayer::zeros(l.inputs, l.outputs))
                .collect(),
        }
    }

    pub(crate) fn clear(&mut self) {
        for l in &mut self.layers {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
            l.biases.iter_mut().for_each(|b| *b = 0.0);
        }
    }

    /// Flattened in the same order as [`ActuatorNetModel::parameters`].
    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
            .collect()
    }
}

/// Feed-forward torque regressor.
///
/// Inputs are standardised with the stored [`Normalization`], hidden layers use
/// `activation`, the output layer is linear and its value is mapped back to
/// N·m with the target statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActuatorNetModel {
    pub history: usize,
    pub activation: Activation,
    pub normalization: Normalization,
    pub layers: Vec<DenseLayer>,
}

/// Reusable buffers for forward/backward passes.
pub(crate) struct Workspace {
    input: Vec<f64>,
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
    delta: Vec<Vec<f64>>,
}

impl ActuatorNetModel {
    /// `2H+1 → width → width → 1` with Glorot-initialised weights.
    pub fn new<R: Rng>(
        history: usize,
        width: usize,
        activation: Activation,
        normalization: Normalization,
        rng: &mut R,
    ) -> Result<Self> {
        Self::with_hidden(history, &[width, width], activation, normalization, rng)
    }

    pub fn with_hidden<R: Rng>(
        history: usize,
        hidden: &[usize],
        activation: Activation,
        normalization: Normalization,
        rng: &mut R,
    ) -> Result<Self> {
        let mut dims = vec![feature_width(history)];
        dims.extend_from_slice(hidden);
        dims.push(1);
        let layers = dims
            .windows(2)
            .map(|d| DenseLayer::glorot(d[0], d[1], rng))
            .collect();
        let model = Self {
            history,
            activation,
            normalization,
            layers,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let width = feature_width(self.history);
        if self.history == 0 {
            return Err(Error::invalid("model history must be >= 1"));
        }
        self.normalization.validate()?;
        if self.normalization.width() != width {
            return Err(Error::invalid(format!(
                "normalization covers {} features, model expects {width}",
                self.normalization.width()
            )));
        }
        let Some(last) = self.layers.last() else {
            return Err(Error::invalid("model has no layers"));
        };
        if self.layers[0].inputs != width || last.outputs != 1 {
            return Err(Error::invalid(format!(
                "layers map {} → {}, expected {width} → 1",
                self.layers[0].inputs, last.outputs
            )));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.weights.len() != l.inputs * l.outputs || l.biases.len() != l.outputs {
                return Err(Error::invalid(format!(
                    "layer {i} has inconsistent weight counts"
                )));
            }
            if l.weights.iter().chain(&l.biases).any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!(
                    "layer {i} contains a non-finite weight"
                )));
            }
        }
        for (i, pair) in self.layers.windows(2).enumerate() {
            if pair[0].outputs != pair[1].inputs {
                return Err(Error::invalid(format!(
                    "layer {i} outputs {} values but layer {} takes {}",
                    pair[0].outputs,
                    i + 1,
                    pair[1].inputs
                )));
            }
        }
        Ok(())
    }

    pub fn input_width(&self) -> usize {
        feature_width(self.history)
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    pub fn parameters(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
            .collect()
    }

    pub fn set_parameters(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.parameter_count());
        let mut it = params.iter().copied();
        for l in &mut self.layers {
            l.weights
                .iter_mut()
                .chain(l.biases.iter_mut())
                .for_each(|w| {
                    *w = it.next().expect("length checked above");
                });
        }
    }

    pub(crate) fn workspace(&self) -> Workspace {
        Workspace {
            input: vec![0.0; self.input_width()],
            pre: self.layers.iter().map(|l| vec![0.0; l.outputs]).collect(),
            post: self.layers.iter().map(|l| vec![0.0; l.outputs]).collect(),
            delta: self.layers.iter().map(|l| vec![0.0; l.outputs]).collect(),
        }
    }

    // Forward pass on already-normalised inputs held in `ws.input`.
    fn forward_ws(&self, ws: &mut Workspace) -> f64 {
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let input: &[f64] = if i == 0 { &ws.input } else { &ws.post[i - 1] };
            layer.forward(input, &mut ws.pre[i]);
            let act = if i == last {
                Activation::Identity
            } else {
                self.activation
            };
            for (p, z) in ws.post[i].iter_mut().zip(&ws.pre[i]) {
                *p = act.apply(*z);
            }
        }
        ws.post[last][0]
    }

    /// Output in normalised target units for raw features.
    pub(crate) fn forward_raw(&self, features: &[f64], ws: &mut Workspace) -> f64 {
        self.normalization.normalize_into(features, &mut ws.input);
        self.forward_ws(ws)
    }

    /// Accumulates `scale · ∂(ŷ − y)²/∂θ` for one sample into `grads` and
    /// returns the squared error, all in normalised target units.
    pub(crate) fn accumulate_gradient(
        &self,
        features: &[f64],
        target_normalized: f64,
        scale: f64,
        ws: &mut Workspace,
        grads: &mut Gradients,
    ) -> f64 {
        let y_hat = self.forward_raw(features, ws);
        let err = y_hat - target_normalized;
        let last = self.layers.len() - 1;
        ws.delta[last][0] = 2.0 * err * scale;
        for i in (0..=last).rev() {
            if i < last {
                // δ_i = (W_{i+1}ᵀ δ_{i+1}) ⊙ σ'(z_i)
                let next = &self.layers[i + 1];
                let (lo, hi) = ws.delta.split_at_mut(i + 1);
                let cur = &mut lo[i];
                cur.iter_mut().for_each(|d| *d = 0.0);
                for (row, dn) in next.weights.chunks_exact(next.inputs).zip(&hi[0]) {
                    for (c, w) in cur.iter_mut().zip(row) {
                        *c += w * dn;
                    }
                }
                for (c, z) in cur.iter_mut().zip(&ws.pre[i]) {
                    *c *= self.activation.derivative(*z);
                }
            }
            let input: &[f64] = if i == 0 { &ws.input } else { &ws.post[i - 1] };
            let g = &mut grads.layers[i];
            for ((grow, gb), d) in g
                .weights
                .chunks_exact_mut(g.inputs)
                .zip(g.biases.iter_mut())
                .zip(&ws.delta[i])
            {
                *gb += d;
                for (gw, x) in grow.iter_mut().zip(input) {
                    *gw += d * x;
                }
            }
        }
        err * err
    }

    /// Mean squared error (normalised target units) over `samples` and its
    /// gradient with respect to every weight and bias.
    pub fn loss_and_gradient(&self, samples: &[(Vec<f64>, f64)]) -> (f64, Gradients) {
        let mut grads = Gradients::zeros_like(self);
        let mut ws = self.workspace();
        let scale = 1.0 / samples.len() as f64;
        let mut loss = 0.0;
        for (x, y) in samples {
            let yn = self.normalization.normalize_target(*y);
            loss += self.accumulate_gradient(x, yn, scale, &mut ws, &mut grads);
        }
        (loss * scale, grads)
    }

    /// Loss only, matching [`ActuatorNetModel::loss_and_gradient`].
    pub fn loss(&self, samples: &[(Vec<f64>, f64)]) -> f64 {
        let mut ws = self.workspace();
        samples
            .iter()
            .map(|(x, y)| {
                let e = self.forward_raw(x, &mut ws) - self.normalization.normalize_target(*y);
                e * e
            })
            .sum::<f64>()
            / samples.len() as f64
    }

    pub(crate) fn apply_momentum_step(
        &mut self,
        grads: &Gradients,
        velocity: &mut Gradients,
        learning_rate: f64,
        momentum: f64,
    ) {
        for ((layer, g), v) in self
            .layers
            .iter_mut()
            .zip(&grads.layers)
            .zip(&mut velocity.layers)
        {
            let params = layer.weights.iter_mut().chain(layer.biases.iter_mut());
            let gs = g.weights.iter().chain(&g.biases);
            let vs = v.weights.iter_mut().chain(v.biases.iter_mut());
            for ((p, g), v) in params.zip(gs).zip(vs) {
                *v = momentum * *v - learning_rate * g;
                *p += *v;
            }
        }
    }

    /// Predicted net torque (N·m) for one window.
    pub fn predict(&self, window: &FeatureWindow) -> Result<f64> {
        self.predict_features(&window.to_features())
    }

    /// Predicted torque for a raw feature vector (positions then velocities).
    pub fn predict_features(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.input_width() {
            return Err(Error::invalid(format!(
                "window has {} features, model expects {}",
                features.len(),
                self.input_width()
            )));
        }
        let mut ws = self.workspace();
        let z = self.forward_raw(features, &mut ws);
        Ok(self.normalization.denormalize_target(z))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }
}
