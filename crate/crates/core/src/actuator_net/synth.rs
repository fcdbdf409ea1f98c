use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::ActuatorDataset;
use crate::error::{Error, Result};
use crate::joint::{self, JointParams, JointState};
use crate::trajectory::Trajectory;

/// Synthetic actuator data: the joint tracks random sums of sinusoids.
///
/// Each segment draws a fresh mixture `offset + Σ A_k sin(ω_k t + φ_k)`, is
/// simulated at `sim_dt` from rest, and logged every `log_every` steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub params: JointParams,
    /// Windows to produce in total.
    pub samples: usize,
    pub history: usize,
    /// Logged rows per segment (including the `history` warm-up rows).
    pub segment_rows: usize,
    pub sim_dt: f64,
    pub log_every: usize,
    pub components: usize,
    pub amplitude: [f64; 2],
    pub omega: [f64; 2],
    pub offset: [f64; 2],
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            params: JointParams::saturn_shank(),
            samples: 50_000,
            history: super::DEFAULT_HISTORY,
            segment_rows: 1000,
            sim_dt: joint::DEFAULT_DT,
            log_every: 10,
            components: 3,
            amplitude: [0.02, 0.4],
            omega: [0.5, 12.0],
            offset: [-0.5, 0.5],
            seed: 0,
        }
    }
}

fn draw(rng: &mut ChaCha8Rng, range: [f64; 2]) -> f64 {
    if range[0] == range[1] {
        range[0]
    } else {
        rng.random_range(range[0]..range[1])
    }
}

impl SyntheticConfig {
    fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.samples == 0 || self.history == 0 || self.log_every == 0 || self.components == 0 {
            return Err(Error::invalid(
                "samples, history, log_every and components must be >= 1",
            ));
        }
        if self.segment_rows <= self.history {
            return Err(Error::invalid(
                "segment_rows must exceed the history length",
            ));
        }
        for (name, r) in [
            ("amplitude", self.amplitude),
            ("omega", self.omega),
            ("offset", self.offset),
        ] {
            if !(r[0] <= r[1] && r[0].is_finite() && r[1].is_finite()) {
                return Err(Error::invalid(format!(
                    "{name} range must satisfy lo <= hi"
                )));
            }
        }
        Ok(())
    }
}

/// Simulated segments whose windows add up to exactly `config.samples`.
pub fn generate_trajectories(config: &SyntheticConfig) -> Result<Vec<Trajectory>> {
    config.validate()?;
    let per_segment = config.segment_rows - config.history;
    let mut remaining = config.samples;
    let mut out = Vec::new();
    let mut segment = 0u64;
    while remaining > 0 {
        let windows = remaining.min(per_segment);
        let rows = windows + config.history;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(segment);
        let offset = draw(&mut rng, config.offset);
        let terms: Vec<(f64, f64, f64)> = (0..config.components)
            .map(|_| {
                (
                    draw(&mut rng, config.amplitude),
                    draw(&mut rng, config.omega),
                    rng.random_range(0.0..2.0 * PI),
                )
            })
            .collect();
        let target = |t: f64| {
            offset
                + terms
                    .iter()
                    .map(|(a, w, p)| a * (w * t + p).sin())
                    .sum::<f64>()
        };
        let duration = ((rows - 1) * config.log_every) as f64 * config.sim_dt;
        let fine = joint::simulate(
            &config.params,
            target,
            duration,
            config.sim_dt,
            JointState::at_rest(offset),
        )?;
        let mut logged = fine.decimate(config.log_every)?;
        if logged.len() != rows {
            // Round-off in the row count; trim to the planned length.
            let kept = logged.rows()[..rows.min(logged.len())].to_vec();
            logged = Trajectory::new(logged.dt(), kept)?;
        }
        remaining -= logged.len() - config.history;
        out.push(logged);
        segment += 1;
    }
    Ok(out)
}

pub fn synthetic_dataset(config: &SyntheticConfig) -> Result<ActuatorDataset> {
    let trajectories = generate_trajectories(config)?;
    ActuatorDataset::from_trajectories(&trajectories, config.history)
}
