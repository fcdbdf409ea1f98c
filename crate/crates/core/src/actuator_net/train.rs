use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::ActuatorDataset;
use super::model::{Activation, ActuatorNetModel, Gradients};
use crate::error::{Error, Result};

/// Mini-batch SGD with classical momentum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub hidden_width: usize,
    pub activation: Activation,
    /// Fraction of samples held out for the reported loss.
    pub heldout_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 64,
            learning_rate: 1e-3,
            momentum: 0.9,
            hidden_width: 32,
            activation: Activation::Softsign,
            heldout_fraction: 0.1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.hidden_width == 0 {
            return Err(Error::invalid("epochs, batch size and width must be >= 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning rate must be > 0"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::invalid("momentum must lie in [0, 1)"));
        }
        if !(0.0..1.0).contains(&self.heldout_fraction) {
            return Err(Error::invalid("held-out fraction must lie in [0, 1)"));
        }
        Ok(())
    }
}

// Independent random streams so that changing one use never shifts another.
const SPLIT_STREAM: u64 = 0;
const INIT_STREAM: u64 = 1;
const SHUFFLE_STREAM: u64 = 2;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Seeded shuffle split into `(train, held_out)` indices.
///
/// At least one sample stays in training; the held-out part is empty only when
/// the dataset has a single sample or `fraction` is zero.
pub fn heldout_split(len: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..len).collect();
    idx.shuffle(&mut rng(seed, SPLIT_STREAM));
    let mut held = (len as f64 * fraction).round() as usize;
    if fraction > 0.0 && len > 1 {
        held = held.max(1);
    }
    held = held.min(len.saturating_sub(1));
    let train = idx.split_off(held);
    (train, idx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: ActuatorNetModel,
    /// Mean training loss per epoch, in normalised target units.
    pub epoch_losses: Vec<f64>,
    /// MSE on the held-out split in (N·m)²; falls back to the training set
    /// when nothing is held out.
    pub heldout_mse: f64,
    pub train_indices: Vec<usize>,
    pub heldout_indices: Vec<usize>,
}

/// Fits an [`ActuatorNetModel`] to `data` by minimising mean squared torque
/// error. Identical `(data, config)` give bit-identical weights.
pub fn train(data: &ActuatorDataset, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::invalid("cannot train on an empty dataset"));
    }
    let (mut train_idx, heldout_idx) =
        heldout_split(data.len(), config.heldout_fraction, config.seed);

    let mut model = ActuatorNetModel::new(
        data.history(),
        config.hidden_width,
        config.activation,
        data.normalization().clone(),
        &mut rng(config.seed, INIT_STREAM),
    )?;
    let norm = data.normalization().clone();
    let targets: Vec<f64> = data
        .targets()
        .iter()
        .map(|&y| norm.normalize_target(y))
        .collect();

    let mut ws = model.workspace();
    let mut grads = Gradients::zeros_like(&model);
    let mut velocity = Gradients::zeros_like(&model);
    let mut shuffle = rng(config.seed, SHUFFLE_STREAM);
    let mut epoch_losses = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        train_idx.shuffle(&mut shuffle);
        let mut sse = 0.0;
        for batch in train_idx.chunks(config.batch_size) {
            grads.clear();
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                sse += model.accumulate_gradient(
                    data.features(i),
                    targets[i],
                    scale,
                    &mut ws,
                    &mut grads,
                );
            }
            model.apply_momentum_step(&grads, &mut velocity, config.learning_rate, config.momentum);
        }
        let loss = sse / train_idx.len() as f64;
        if !loss.is_finite() {
            return Err(Error::TrainingDivergence { epoch, loss });
        }
        epoch_losses.push(loss);
    }
    train_idx.sort_unstable();

    let eval_idx = if heldout_idx.is_empty() {
        &train_idx
    } else {
        &heldout_idx
    };
    let heldout_mse = evaluate(&model, &data.subset(eval_idx))?.mse;

    Ok(TrainOutcome {
        model,
        epoch_losses,
        heldout_mse,
        train_indices: train_idx,
        heldout_indices: heldout_idx,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Mean squared error in (N·m)².
    pub mse: f64,
    /// Coefficient of determination against the dataset's own mean.
    pub r2: f64,
    pub samples: usize,
}

impl Metrics {
    pub fn from_predictions(predictions: &[f64], targets: &[f64]) -> Result<Self> {
        if targets.is_empty() || predictions.len() != targets.len() {
            return Err(Error::invalid(
                "need equally many predictions and targets, at least one",
            ));
        }
        let n = targets.len() as f64;
        let mean = targets.iter().sum::<f64>() / n;
        let ss_res: f64 = predictions
            .iter()
            .zip(targets)
            .map(|(p, y)| (y - p).powi(2))
            .sum();
        let ss_tot: f64 = targets.iter().map(|y| (y - mean).powi(2)).sum();
        let r2 = if ss_tot > 0.0 {
            1.0 - ss_res / ss_tot
        } else if ss_res == 0.0 {
            1.0
        } else {
            0.0
        };
        Ok(Self {
            mse: ss_res / n,
            r2,
            samples: targets.len(),
        })
    }
}

pub fn evaluate(model: &ActuatorNetModel, data: &ActuatorDataset) -> Result<Metrics> {
    if data.width() != model.input_width() {
        return Err(Error::invalid(format!(
            "dataset windows have {} features, model expects {}",
            data.width(),
            model.input_width()
        )));
    }
    let mut ws = model.workspace();
    let predictions: Vec<f64> = (0..data.len())
        .map(|i| {
            let z = model.forward_raw(data.features(i), &mut ws);
            model.normalization.denormalize_target(z)
        })
        .collect();
    Metrics::from_predictions(&predictions, data.targets())
}
