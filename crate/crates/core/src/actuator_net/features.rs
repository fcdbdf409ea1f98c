use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

pub const DEFAULT_HISTORY: usize = 3;

/// Position and velocity history feeding one prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureWindow {
    /// `θ_t, θ_{t−1}, …, θ_{t−H}`
    pub positions: Vec<f64>,
    /// `θ̇_{t−1}, …, θ̇_{t−H}`
    pub velocities: Vec<f64>,
}

impl FeatureWindow {
    pub fn new(positions: Vec<f64>, velocities: Vec<f64>) -> Result<Self> {
        if positions.len() != velocities.len() + 1 || velocities.is_empty() {
            return Err(Error::invalid(format!(
                "window needs H+1 positions and H >= 1 velocities, got {} and {}",
                positions.len(),
                velocities.len()
            )));
        }
        if positions.iter().chain(&velocities).any(|v| !v.is_finite()) {
            return Err(Error::invalid("window contains a non-finite value"));
        }
        Ok(Self {
            positions,
            velocities,
        })
    }

    pub fn history(&self) -> usize {
        self.velocities.len()
    }

    pub fn width(&self) -> usize {
        self.positions.len() + self.velocities.len()
    }

    /// Positions followed by velocities.
    pub fn to_features(&self) -> Vec<f64> {
        let mut v = self.positions.clone();
        v.extend_from_slice(&self.velocities);
        v
    }

    fn from_features(history: usize, features: &[f64]) -> Self {
        Self {
            positions: features[..=history].to_vec(),
            velocities: features[history + 1..].to_vec(),
        }
    }
}

pub fn feature_width(history: usize) -> usize {
    2 * history + 1
}

/// Per-feature and target standardisation statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub feature_mean: Vec<f64>,
    pub feature_std: Vec<f64>,
    pub target_mean: f64,
    pub target_std: f64,
}

// Constant columns would divide by zero; they are left unscaled instead.
fn usable_std(std: f64) -> f64 {
    if std > 1e-12 && std.is_finite() {
        std
    } else {
        1.0
    }
}

impl Normalization {
    pub fn identity(width: usize) -> Self {
        Self {
            feature_mean: vec![0.0; width],
            feature_std: vec![1.0; width],
            target_mean: 0.0,
            target_std: 1.0,
        }
    }

    fn fit(width: usize, features: &[f64], targets: &[f64]) -> Self {
        let n = targets.len() as f64;
        let mut mean = vec![0.0; width];
        for row in features.chunks_exact(width) {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; width];
        for row in features.chunks_exact(width) {
            for ((v, x), m) in var.iter_mut().zip(row).zip(&mean) {
                *v += (x - m).powi(2);
            }
        }
        let feature_std = var.iter().map(|v| usable_std((v / n).sqrt())).collect();
        let target_mean = targets.iter().sum::<f64>() / n;
        let target_var = targets
            .iter()
            .map(|y| (y - target_mean).powi(2))
            .sum::<f64>()
            / n;
        Self {
            feature_mean: mean,
            feature_std,
            target_mean,
            target_std: usable_std(target_var.sqrt()),
        }
    }

    pub fn width(&self) -> usize {
        self.feature_mean.len()
    }

    pub fn normalize_into(&self, raw: &[f64], out: &mut [f64]) {
        for (((o, x), m), s) in out
            .iter_mut()
            .zip(raw)
            .zip(&self.feature_mean)
            .zip(&self.feature_std)
        {
            *o = (x - m) / s;
        }
    }

    pub fn normalize(&self, raw: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; raw.len()];
        self.normalize_into(raw, &mut out);
        out
    }

    pub fn denormalize(&self, normalized: &[f64]) -> Vec<f64> {
        normalized
            .iter()
            .zip(&self.feature_mean)
            .zip(&self.feature_std)
            .map(|((z, m), s)| z * s + m)
            .collect()
    }

    pub fn normalize_target(&self, y: f64) -> f64 {
        (y - self.target_mean) / self.target_std
    }

    pub fn denormalize_target(&self, z: f64) -> f64 {
        z * self.target_std + self.target_mean
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.feature_std.len() != self.feature_mean.len() {
            return Err(Error::invalid("normalization mean/std lengths differ"));
        }
        let all = self
            .feature_mean
            .iter()
            .chain(&self.feature_std)
            .chain([&self.target_mean, &self.target_std]);
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::invalid("normalization contains a non-finite value"));
        }
        if self
            .feature_std
            .iter()
            .chain([&self.target_std])
            .any(|&s| s <= 0.0)
        {
            return Err(Error::invalid("normalization std must be > 0"));
        }
        Ok(())
    }
}

/// Windows paired with the torque measured at the window's newest sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ActuatorDataset {
    history: usize,
    features: Vec<f64>,
    targets: Vec<f64>,
    normalization: Normalization,
}

impl ActuatorDataset {
    /// Builds a dataset from raw windows; normalization is fitted to them.
    pub fn from_samples(samples: Vec<(FeatureWindow, f64)>) -> Result<Self> {
        let history = match samples.first() {
            Some((w, _)) => w.history(),
            None => return Err(Error::invalid("dataset must contain at least one sample")),
        };
        let width = feature_width(history);
        let mut features = Vec::with_capacity(samples.len() * width);
        let mut targets = Vec::with_capacity(samples.len());
        for (window, torque) in samples {
            if window.history() != history {
                return Err(Error::invalid(
                    "all windows must share the same history length",
                ));
            }
            if !torque.is_finite() {
                return Err(Error::invalid("non-finite torque target"));
            }
            features.extend(window.to_features());
            targets.push(torque);
        }
        Ok(Self::from_parts(history, features, targets))
    }

    fn from_parts(history: usize, features: Vec<f64>, targets: Vec<f64>) -> Self {
        let normalization = Normalization::fit(feature_width(history), &features, &targets);
        Self {
            history,
            features,
            targets,
            normalization,
        }
    }

    /// Concatenates the windows of several trajectories. Windows never span
    /// two trajectories.
    pub fn from_trajectories(trajectories: &[Trajectory], history: usize) -> Result<Self> {
        if trajectories.is_empty() {
            return Err(Error::invalid("no trajectories given"));
        }
        let mut features = Vec::new();
        let mut targets = Vec::new();
        for traj in trajectories {
            append_windows(traj, history, &mut features, &mut targets)?;
        }
        Ok(Self::from_parts(history, features, targets))
    }

    pub fn history(&self) -> usize {
        self.history
    }

    pub fn width(&self) -> usize {
        feature_width(self.history)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn normalization(&self) -> &Normalization {
        &self.normalization
    }

    pub fn features(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.features[i * w..(i + 1) * w]
    }

    pub fn window(&self, i: usize) -> FeatureWindow {
        FeatureWindow::from_features(self.history, self.features(i))
    }

    pub fn target(&self, i: usize) -> f64 {
        self.targets[i]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Samples at `indices`, keeping this dataset's normalization.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut features = Vec::with_capacity(indices.len() * self.width());
        let mut targets = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.features(i));
            targets.push(self.targets[i]);
        }
        Self {
            history: self.history,
            features,
            targets,
            normalization: self.normalization.clone(),
        }
    }
}

fn append_windows(
    traj: &Trajectory,
    history: usize,
    features: &mut Vec<f64>,
    targets: &mut Vec<f64>,
) -> Result<()> {
    if history == 0 {
        return Err(Error::invalid("history length H must be >= 1"));
    }
    let rows = traj.rows();
    if rows.len() <= history {
        return Err(Error::invalid(format!(
            "trajectory has {} rows; H = {history} needs more than {history}",
            rows.len()
        )));
    }
    for i in history..rows.len() {
        features.extend((0..=history).map(|k| rows[i - k].theta));
        features.extend((1..=history).map(|k| rows[i - k].theta_dot));
        targets.push(rows[i].net_torque());
    }
    Ok(())
}

/// One sample per row `i ≥ H`, targeting the net torque `τ_pd + f` at row `i`.
pub fn build_windows(traj: &Trajectory, history: usize) -> Result<ActuatorDataset> {
    ActuatorDataset::from_trajectories(std::slice::from_ref(traj), history)
}
