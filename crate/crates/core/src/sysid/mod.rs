//! Identification of inertia, viscous damping and Coulomb friction from a
//! sinusoidal PD-tracking experiment.
//!
//! The joint is commanded to follow `A·sin(ωt)`; the measured angle trace is
//! compared to the trace simulated with candidate parameters, and the mean
//! squared angle error is minimised over `(I, B, b_c)`. Positivity is enforced
//! by searching over logarithms of the parameters.

pub mod nelder_mead;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::joint::{self, JointParams, JointState, DEFAULT_STICTION_BAND};
use crate::trajectory::Trajectory;

pub use nelder_mead::{NelderMeadOptions, NelderMeadOutcome};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "FRICTIONLAB_THREADS";

/// Fraction of samples during which the best-fit joint must be moving for the
/// identification to count as converged. Below it, inertia and damping are
/// not observable from the data.
pub const MIN_MOVING_FRACTION: f64 = 0.05;

/// Sinusoidal excitation `A·sin(ωt)` sampled at `dt` for `duration` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Excitation {
    #[serde(rename = "amplitude_A")]
    pub amplitude: f64,
    pub omega: f64,
    pub duration: f64,
    pub dt: f64,
}

impl Default for Excitation {
    fn default() -> Self {
        Self {
            amplitude: 0.5,
            omega: 2.0 * PI,
            duration: 5.0,
            dt: joint::DEFAULT_DT,
        }
    }
}

impl Excitation {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("amplitude_A", self.amplitude),
            ("omega", self.omega),
            ("duration", self.duration),
            ("dt", self.dt),
        ] {
            ensure_finite(name, v)?;
            if v <= 0.0 {
                return Err(Error::invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        let period = 2.0 * PI / self.omega;
        if self.duration < period * (1.0 - 1e-12) {
            return Err(Error::invalid(format!(
                "duration {} is shorter than one excitation period {period}",
                self.duration
            )));
        }
        if self.dt >= PI / self.omega {
            return Err(Error::invalid(format!(
                "dt {} does not resolve omega {} (needs dt < π/ω)",
                self.dt, self.omega
            )));
        }
        Ok(())
    }

    /// Commanded angle at time `t`; errors outside `[0, duration]`.
    pub fn target(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.duration).contains(&t) {
            return Err(Error::invalid(format!(
                "t = {t} outside excitation window [0, {}]",
                self.duration
            )));
        }
        Ok(self.signal(t))
    }

    fn signal(&self, t: f64) -> f64 {
        self.amplitude * (self.omega * t).sin()
    }

    /// Simulates the joint tracking this excitation from `initial`.
    pub fn run(&self, params: &JointParams, initial: JointState) -> Result<Trajectory> {
        self.validate()?;
        joint::simulate(params, |t| self.signal(t), self.duration, self.dt, initial)
    }
}

/// `A·sin(ωt)`, checked against the excitation window.
pub fn excitation_target(exc: &Excitation, t: f64) -> Result<f64> {
    exc.target(t)
}

/// Controller-side constants held fixed during identification, plus the state
/// the experiment starts from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedParams {
    #[serde(rename = "motor_strength_k")]
    pub motor_strength: f64,
    pub kp: f64,
    pub kd: f64,
    pub tau_max: f64,
    #[serde(default)]
    pub initial: JointState,
}

impl FixedParams {
    pub fn from_joint(params: &JointParams) -> Self {
        Self {
            motor_strength: params.motor_strength,
            kp: params.kp,
            kd: params.kd,
            tau_max: params.tau_max,
            initial: JointState::default(),
        }
    }
}

/// The three physical parameters being identified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    #[serde(rename = "inertia_I")]
    pub inertia: f64,
    #[serde(rename = "viscous_B")]
    pub viscous: f64,
    #[serde(rename = "coulomb_bc")]
    pub coulomb: f64,
}

impl PhysicalParams {
    pub fn of(params: &JointParams) -> Self {
        Self {
            inertia: params.inertia,
            viscous: params.viscous,
            coulomb: params.coulomb,
        }
    }

    pub fn with_fixed(&self, fixed: &FixedParams) -> JointParams {
        JointParams {
            inertia: self.inertia,
            viscous: self.viscous,
            coulomb: self.coulomb,
            motor_strength: fixed.motor_strength,
            kp: fixed.kp,
            kd: fixed.kd,
            tau_max: fixed.tau_max,
        }
    }

    fn as_array(&self) -> [f64; 3] {
        [self.inertia, self.viscous, self.coulomb]
    }

    fn from_logs(x: &[f64]) -> Self {
        Self {
            inertia: x[0].exp(),
            viscous: x[1].exp(),
            coulomb: x[2].exp(),
        }
    }

    fn check_positive(&self) -> Result<()> {
        for (name, v) in [
            ("inertia_I", self.inertia),
            ("viscous_B", self.viscous),
            ("coulomb_bc", self.coulomb),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::ConstraintViolation(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Largest relative deviation of any parameter from `truth`.
    pub fn max_relative_error(&self, truth: &PhysicalParams) -> f64 {
        self.as_array()
            .iter()
            .zip(truth.as_array())
            .map(|(est, t)| ((est - t) / t).abs())
            .fold(0.0, f64::max)
    }
}

struct Fit {
    mse: f64,
    moving_fraction: f64,
}

fn check_measurement(measured: &Trajectory, exc: &Excitation) -> Result<()> {
    exc.validate()?;
    if measured.is_empty() {
        return Err(Error::invalid("measured trajectory is empty"));
    }
    if ((measured.dt() - exc.dt) / exc.dt).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "measured trajectory is sampled at dt = {} but the excitation uses dt = {}",
            measured.dt(),
            exc.dt
        )));
    }
    Ok(())
}

// Replays the experiment for `params` and compares angles sample by sample.
fn fit(params: &JointParams, measured: &Trajectory, exc: &Excitation, initial: JointState) -> Fit {
    let rows = measured.rows();
    let t0 = rows[0].t;
    let mut state = initial;
    let mut sse = 0.0;
    let mut moving = 0usize;
    for (i, row) in rows.iter().enumerate() {
        let residual = state.theta - row.theta;
        sse += residual * residual;
        let detail = joint::advance(
            params,
            &state,
            exc.signal(t0 + i as f64 * exc.dt),
            exc.dt,
            DEFAULT_STICTION_BAND,
        );
        if !detail.stuck {
            moving += 1;
        }
        state = detail.next;
        if !state.theta.is_finite() {
            return Fit {
                mse: f64::INFINITY,
                moving_fraction: 0.0,
            };
        }
    }
    Fit {
        mse: sse / rows.len() as f64,
        moving_fraction: moving as f64 / rows.len() as f64,
    }
}

/// Mean squared angle error between the measurement and the response
/// simulated with `candidate` physical parameters.
pub fn identification_objective(
    candidate: &PhysicalParams,
    measured: &Trajectory,
    fixed: &FixedParams,
    exc: &Excitation,
) -> Result<f64> {
    candidate.check_positive()?;
    check_measurement(measured, exc)?;
    let params = candidate.with_fixed(fixed);
    params.validate()?;
    Ok(fit(&params, measured, exc, fixed.initial).mse)
}

/// `100·b_c/τ_max`, the friction share of the available torque in percent.
pub fn friction_ratio(coulomb: f64, tau_max: f64) -> Result<f64> {
    ensure_finite("coulomb_bc", coulomb)?;
    ensure_finite("tau_max", tau_max)?;
    if tau_max <= 0.0 {
        return Err(Error::invalid(format!(
            "tau_max must be > 0, got {tau_max}"
        )));
    }
    if coulomb < 0.0 {
        return Err(Error::invalid(format!(
            "coulomb_bc must be >= 0, got {coulomb}"
        )));
    }
    Ok(100.0 * coulomb / tau_max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentifyOptions {
    pub starts: usize,
    pub seed: u64,
    /// Centre of the log-uniform start distribution; starts are drawn within
    /// `[0.1×, 10×]` of each component.
    pub initial_guess: PhysicalParams,
    pub nelder_mead: NelderMeadOptions,
    /// Worker threads; `None` reads [`THREADS_ENV`] and falls back to rayon's default.
    pub threads: Option<usize>,
}

impl Default for IdentifyOptions {
    fn default() -> Self {
        Self {
            starts: 8,
            seed: 0,
            initial_guess: PhysicalParams {
                inertia: 0.01,
                viscous: 0.1,
                coulomb: 0.2,
            },
            nelder_mead: NelderMeadOptions::default(),
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartReport {
    pub index: usize,
    pub initial: PhysicalParams,
    pub estimate: PhysicalParams,
    pub objective_value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentificationResult {
    #[serde(rename = "inertia_I")]
    pub inertia: f64,
    #[serde(rename = "viscous_B")]
    pub viscous: f64,
    #[serde(rename = "coulomb_bc")]
    pub coulomb: f64,
    /// Mean squared angle error at the estimate (rad²).
    pub objective_value: f64,
    /// Objective evaluations summed over all starts.
    pub evaluations: usize,
    /// The winning start converged and the fitted joint moved for at least
    /// [`MIN_MOVING_FRACTION`] of the experiment.
    pub converged: bool,
    pub best_start: usize,
    /// Fraction of samples in which the best-fit joint was not stuck.
    pub moving_fraction: f64,
    pub starts: Vec<StartReport>,
}

impl IdentificationResult {
    pub fn estimate(&self) -> PhysicalParams {
        PhysicalParams {
            inertia: self.inertia,
            viscous: self.viscous,
            coulomb: self.coulomb,
        }
    }
}

fn thread_count(requested: Option<usize>) -> Option<usize> {
    requested
        .or_else(|| std::env::var(THREADS_ENV).ok()?.trim().parse().ok())
        .filter(|&n| n > 0)
}

fn draw_start(guess: &PhysicalParams, seed: u64, index: usize) -> [f64; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let span = 10f64.ln();
    let g = guess.as_array();
    std::array::from_fn(|k| g[k].ln() + rng.random_range(-span..=span))
}

/// Multi-start Nelder-Mead over `(ln I, ln B, ln b_c)`.
///
/// Deterministic for a given `(measured, fixed, exc, options.seed, options.starts)`
/// regardless of thread count: every start has its own random stream and the
/// best start is chosen by lowest objective, ties going to the lowest index.
pub fn identify(
    measured: &Trajectory,
    fixed: &FixedParams,
    exc: &Excitation,
    options: &IdentifyOptions,
) -> Result<IdentificationResult> {
    if options.starts == 0 {
        return Err(Error::invalid("at least one start is required"));
    }
    options.initial_guess.check_positive()?;
    check_measurement(measured, exc)?;
    // Validate the controller constants once with a dummy physical part.
    options.initial_guess.with_fixed(fixed).validate()?;

    let run_start = |index: usize| -> StartReport {
        let x0 = draw_start(&options.initial_guess, options.seed, index);
        let objective = |x: &[f64]| {
            let params = PhysicalParams::from_logs(x).with_fixed(fixed);
            if params.validate().is_err() || params.coulomb <= 0.0 || params.viscous <= 0.0 {
                return f64::INFINITY;
            }
            fit(&params, measured, exc, fixed.initial).mse
        };
        let out = nelder_mead::minimize(objective, &x0, &options.nelder_mead);
        StartReport {
            index,
            initial: PhysicalParams::from_logs(&x0),
            estimate: PhysicalParams::from_logs(&out.x),
            objective_value: out.value,
            evaluations: out.evaluations,
            converged: out.converged,
        }
    };

    let reports: Vec<StartReport> = match thread_count(options.threads) {
        Some(1) => (0..options.starts).map(run_start).collect(),
        threads => {
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(n) = threads {
                builder = builder.num_threads(n);
            }
            let pool = builder
                .build()
                .map_err(|e| Error::IdentificationFailure(format!("thread pool: {e}")))?;
            pool.install(|| (0..options.starts).into_par_iter().map(run_start).collect())
        }
    };

    let best = reports
        .iter()
        .filter(|r| r.objective_value.is_finite())
        .min_by(|a, b| {
            a.objective_value
                .total_cmp(&b.objective_value)
                .then(a.index.cmp(&b.index))
        })
        .ok_or_else(|| {
            Error::IdentificationFailure("objective was non-finite for every start".into())
        })?;

    let estimate = best.estimate;
    if estimate.check_positive().is_err() {
        return Err(Error::IdentificationFailure(format!(
            "estimate left the positive orthant: {estimate:?}"
        )));
    }
    let moving_fraction =
        fit(&estimate.with_fixed(fixed), measured, exc, fixed.initial).moving_fraction;

    Ok(IdentificationResult {
        inertia: estimate.inertia,
        viscous: estimate.viscous,
        coulomb: estimate.coulomb,
        objective_value: best.objective_value,
        evaluations: reports.iter().map(|r| r.evaluations).sum(),
        converged: best.converged && moving_fraction >= MIN_MOVING_FRACTION,
        best_start: best.index,
        moving_fraction,
        starts: reports,
    })
}
