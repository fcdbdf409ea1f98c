//! Learned actuator model: an MLP regressing net joint torque from a short
//! history of joint positions and velocities.
//!
//! A window at sample `t` holds positions `θ_t … θ_{t−H}` and velocities
//! `θ̇_{t−1} … θ̇_{t−H}`; the current velocity is deliberately absent. With the
//! default `H = 3` the input has 7 features.

mod baseline;
mod features;
mod model;
mod synth;
mod train;

pub use baseline::LinearBaseline;
pub use features::{build_windows, ActuatorDataset, FeatureWindow, Normalization, DEFAULT_HISTORY};
pub use model::{Activation, ActuatorNetModel, DenseLayer, Gradients};
pub use synth::{generate_trajectories, synthetic_dataset, SyntheticConfig};
pub use train::{evaluate, heldout_split, train, Metrics, TrainConfig, TrainOutcome};
