//! PD-controlled single joint with viscous damping and Coulomb friction.
//!
//! The equation of motion is
//!
//! ```text
//! I·θ̈ + B·θ̇ = τ_pd + f
//! τ_pd = clip(k_motor·(kp·(target − θ) − kd·θ̇), ±τ_max)
//! ```
//!
//! where `f` is Coulomb friction of constant magnitude `b_c` opposing motion.
//! Static and kinetic friction share the same magnitude. Around zero velocity a
//! Karnopp band `|θ̇| ≤ ε` decides between sticking (the joint holds still and
//! friction cancels the applied torque exactly) and breaking away.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::trajectory::{Trajectory, TrajectoryRow};

/// Half-width of the zero-velocity band in which the joint may stick (rad/s).
pub const DEFAULT_STICTION_BAND: f64 = 1e-4;

/// Default integration step (s).
pub const DEFAULT_DT: f64 = 1e-3;

/// Shank torque limit of the Go1 robot (N·m).
pub const GO1_SHANK_TAU_MAX: f64 = 35.55;

/// Shank torque limit of the Saturn Lite hexapod (N·m).
pub const SATURN_SHANK_TAU_MAX: f64 = 45.0;

/// Physical and controller constants of one joint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointParams {
    /// Rotational inertia (kg·m²).
    #[serde(rename = "inertia_I")]
    pub inertia: f64,
    /// Viscous friction coefficient (N·m·s/rad).
    #[serde(rename = "viscous_B")]
    pub viscous: f64,
    /// Coulomb (= static) friction magnitude (N·m).
    #[serde(rename = "coulomb_bc")]
    pub coulomb: f64,
    #[serde(rename = "motor_strength_k")]
    pub motor_strength: f64,
    pub kp: f64,
    pub kd: f64,
    pub tau_max: f64,
}

impl JointParams {
    /// Saturn Lite shank motor: identified means for inertia, damping and
    /// friction, 45 N·m torque limit, and the PD gains used throughout the
    /// examples and tests.
    pub fn saturn_shank() -> Self {
        Self {
            inertia: 0.0145,
            viscous: 0.0704,
            coulomb: 0.442,
            motor_strength: 1.0,
            kp: 5.0,
            kd: 0.05,
            tau_max: SATURN_SHANK_TAU_MAX,
        }
    }

    /// Go1 shank motor, same gains as [`JointParams::saturn_shank`].
    pub fn go1_shank() -> Self {
        Self {
            inertia: 0.0121,
            viscous: 0.0342,
            coulomb: 0.0481,
            motor_strength: 1.0,
            kp: 5.0,
            kd: 0.05,
            tau_max: GO1_SHANK_TAU_MAX,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("inertia_I", self.inertia),
            ("viscous_B", self.viscous),
            ("coulomb_bc", self.coulomb),
            ("motor_strength_k", self.motor_strength),
            ("kp", self.kp),
            ("kd", self.kd),
            ("tau_max", self.tau_max),
        ];
        for (name, value) in fields {
            ensure_finite(name, value)?;
        }
        let positive = [
            ("inertia_I", self.inertia),
            ("motor_strength_k", self.motor_strength),
            ("tau_max", self.tau_max),
        ];
        for (name, value) in positive {
            if value <= 0.0 {
                return Err(Error::invalid(format!("{name} must be > 0, got {value}")));
            }
        }
        let non_negative = [
            ("viscous_B", self.viscous),
            ("coulomb_bc", self.coulomb),
            ("kp", self.kp),
            ("kd", self.kd),
        ];
        for (name, value) in non_negative {
            if value < 0.0 {
                return Err(Error::invalid(format!("{name} must be >= 0, got {value}")));
            }
        }
        Ok(())
    }

    /// Total velocity-proportional damping seen by the joint when the PD
    /// output is not saturated: `B + k_motor·kd`.
    pub fn effective_damping(&self) -> f64 {
        self.viscous + self.motor_strength * self.kd
    }
}

/// Instantaneous angle (rad) and angular velocity (rad/s) of one joint.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct JointState {
    pub theta: f64,
    pub theta_dot: f64,
}

impl JointState {
    pub fn new(theta: f64, theta_dot: f64) -> Result<Self> {
        let state = Self { theta, theta_dot };
        state.validate()?;
        Ok(state)
    }

    pub fn at_rest(theta: f64) -> Self {
        Self {
            theta,
            theta_dot: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        ensure_finite("theta", self.theta)?;
        ensure_finite("theta_dot", self.theta_dot)
    }
}

/// Maps a policy action to a joint target relative to the standing posture.
pub fn action_to_target(action: f64, theta_stand: f64) -> f64 {
    theta_stand + action
}

fn raw_pd(params: &JointParams, state: &JointState, target: f64) -> f64 {
    params.motor_strength * (params.kp * (target - state.theta) - params.kd * state.theta_dot)
}

/// PD torque `k_motor·(kp·(target − θ) − kd·θ̇)`, saturated at `±τ_max`.
pub fn pd_torque(params: &JointParams, state: &JointState, target: f64) -> Result<f64> {
    params.validate()?;
    state.validate()?;
    ensure_finite("target", target)?;
    Ok(raw_pd(params, state, target).clamp(-params.tau_max, params.tau_max))
}

fn coulomb_friction(coulomb: f64, theta_dot: f64, tau_applied: f64, band: f64) -> f64 {
    if theta_dot.abs() > band {
        -coulomb * theta_dot.signum()
    } else if tau_applied.abs() <= coulomb {
        -tau_applied
    } else {
        -coulomb * tau_applied.signum()
    }
}

/// Friction torque acting on the joint.
///
/// Outside the stiction band friction is `−b_c·sign(θ̇)`. Inside the band it
/// cancels `tau_applied` when that is within `b_c` (the joint sticks) and
/// otherwise opposes it with full magnitude `b_c`.
pub fn friction_torque(
    params: &JointParams,
    theta_dot: f64,
    tau_applied: f64,
    stiction_band: f64,
) -> Result<f64> {
    params.validate()?;
    ensure_finite("theta_dot", theta_dot)?;
    ensure_finite("tau_applied", tau_applied)?;
    if !(stiction_band >= 0.0 && stiction_band.is_finite()) {
        return Err(Error::invalid(format!(
            "stiction band must be a finite non-negative velocity, got {stiction_band}"
        )));
    }
    Ok(coulomb_friction(
        params.coulomb,
        theta_dot,
        tau_applied,
        stiction_band,
    ))
}

/// Everything computed during one integration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDetail {
    pub next: JointState,
    /// Saturated PD torque at the start of the step.
    pub tau_pd: f64,
    pub tau_friction: f64,
    /// True when the joint was held by static friction during the step.
    pub stuck: bool,
}

// Assumes params, state, target and dt were validated by the caller.
pub(crate) fn advance(
    params: &JointParams,
    state: &JointState,
    target: f64,
    dt: f64,
    band: f64,
) -> StepDetail {
    let raw = raw_pd(params, state, target);
    let tau_pd = raw.clamp(-params.tau_max, params.tau_max);
    let theta_dot = state.theta_dot;

    // Net non-friction torque τ_pd − B·θ̇. While the PD output is unsaturated
    // the velocity terms enter only through B + k_motor·kd, so parameter sets
    // sharing that sum produce bit-identical motion.
    let tau_applied = if raw == tau_pd {
        params.motor_strength * (params.kp * (target - state.theta))
            - params.effective_damping() * theta_dot
    } else {
        tau_pd - params.viscous * theta_dot
    };

    let moving = theta_dot.abs() > band;
    let tau_friction = coulomb_friction(params.coulomb, theta_dot, tau_applied, band);
    let stuck = !moving && tau_applied.abs() <= params.coulomb;

    let accel = (tau_applied + tau_friction) / params.inertia;
    let mut next_dot = theta_dot + accel * dt;
    if stuck {
        next_dot = 0.0;
    } else if moving && next_dot * theta_dot < 0.0 && tau_applied.abs() <= params.coulomb {
        // Friction reversed the velocity within the step although the drive
        // cannot overcome it: the joint comes to rest instead of chattering.
        next_dot = 0.0;
    }

    StepDetail {
        next: JointState {
            theta: state.theta + next_dot * dt,
            theta_dot: next_dot,
        },
        tau_pd,
        tau_friction,
        stuck,
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "dt must be a finite positive step, got {dt}"
        )))
    }
}

/// One semi-implicit Euler step with the default stiction band.
pub fn step(params: &JointParams, state: &JointState, target: f64, dt: f64) -> Result<JointState> {
    step_detailed(params, state, target, dt, DEFAULT_STICTION_BAND).map(|d| d.next)
}

pub fn step_detailed(
    params: &JointParams,
    state: &JointState,
    target: f64,
    dt: f64,
    stiction_band: f64,
) -> Result<StepDetail> {
    params.validate()?;
    state.validate()?;
    ensure_finite("target", target)?;
    check_dt(dt)?;
    let detail = advance(params, state, target, dt, stiction_band);
    if !(detail.next.theta.is_finite() && detail.next.theta_dot.is_finite()) {
        return Err(Error::invalid(
            "integration produced a non-finite state; reduce dt".to_string(),
        ));
    }
    Ok(detail)
}

/// Number of rows produced by [`simulate`] for a given horizon.
pub fn sample_count(duration: f64, dt: f64) -> usize {
    // Guard against 5.0 / 0.001 = 4999.999… style round-off.
    ((duration / dt) * (1.0 + 1e-12)).floor() as usize + 1
}

/// Simulates the joint tracking `target_fn` from `initial`.
///
/// Row `i` holds the state after `i` steps together with the target, PD torque
/// and friction evaluated at that state.
pub fn simulate<F>(
    params: &JointParams,
    target_fn: F,
    duration: f64,
    dt: f64,
    initial: JointState,
) -> Result<Trajectory>
where
    F: Fn(f64) -> f64,
{
    simulate_with_band(
        params,
        target_fn,
        duration,
        dt,
        initial,
        DEFAULT_STICTION_BAND,
    )
}

pub fn simulate_with_band<F>(
    params: &JointParams,
    target_fn: F,
    duration: f64,
    dt: f64,
    initial: JointState,
    stiction_band: f64,
) -> Result<Trajectory>
where
    F: Fn(f64) -> f64,
{
    params.validate()?;
    initial.validate()?;
    check_dt(dt)?;
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::invalid(format!(
            "duration must be > 0, got {duration}"
        )));
    }

    let n = sample_count(duration, dt);
    let mut rows = Vec::with_capacity(n);
    let mut state = initial;
    for i in 0..n {
        let t = i as f64 * dt;
        let target = target_fn(t);
        ensure_finite("target", target)?;
        let detail = advance(params, &state, target, dt, stiction_band);
        rows.push(TrajectoryRow {
            t,
            target,
            theta: state.theta,
            theta_dot: state.theta_dot,
            tau_pd: detail.tau_pd,
            tau_friction: detail.tau_friction,
        });
        if i + 1 < n {
            if !(detail.next.theta.is_finite() && detail.next.theta_dot.is_finite()) {
                return Err(Error::invalid(format!(
                    "integration diverged at t = {t}; reduce dt"
                )));
            }
            state = detail.next;
        }
    }
    Trajectory::new(dt, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_params() -> JointParams {
        JointParams {
            inertia: 1.0,
            viscous: 0.0,
            coulomb: 0.0,
            motor_strength: 1.0,
            kp: 1.0,
            kd: 0.0,
            tau_max: 100.0,
        }
    }

    #[test]
    fn pd_torque_direct_formula() {
        let p = unit_params();
        let tau = pd_torque(&p, &JointState::default(), 0.5).unwrap();
        assert_eq!(tau, 0.5);
    }

    #[test]
    fn pd_torque_zero_at_equilibrium() {
        let p = JointParams::saturn_shank();
        let s = JointState::at_rest(0.3);
        assert_eq!(pd_torque(&p, &s, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn pd_torque_saturates_at_shank_limit() {
        let p = JointParams {
            kp: 100.0,
            tau_max: 45.0,
            ..unit_params()
        };
        assert_eq!(pd_torque(&p, &JointState::default(), 1.0).unwrap(), 45.0);
        assert_eq!(pd_torque(&p, &JointState::default(), -1.0).unwrap(), -45.0);
    }

    #[test]
    fn pd_torque_rejects_non_finite() {
        let p = unit_params();
        assert!(pd_torque(&p, &JointState::default(), f64::NAN).is_err());
        let bad = JointState {
            theta: f64::INFINITY,
            theta_dot: 0.0,
        };
        assert!(pd_torque(&p, &bad, 0.0).is_err());
    }

    #[test]
    fn friction_opposes_motion() {
        let p = JointParams::saturn_shank();
        assert_eq!(friction_torque(&p, 1.0, 0.0, 1e-4).unwrap(), -0.442);
        assert_eq!(friction_torque(&p, -0.5, 0.0, 1e-4).unwrap(), 0.442);
    }

    #[test]
    fn friction_sticks_below_threshold() {
        let p = JointParams::saturn_shank();
        assert_eq!(friction_torque(&p, 0.0, 0.2, 1e-4).unwrap(), -0.2);
        assert_eq!(friction_torque(&p, 0.0, -1.0, 1e-4).unwrap(), 0.442);
    }

    #[test]
    fn friction_rejects_nan() {
        let p = JointParams::saturn_shank();
        assert!(friction_torque(&p, f64::NAN, 0.0, 1e-4).is_err());
        assert!(friction_torque(&p, 0.0, f64::NAN, 1e-4).is_err());
    }

    #[test]
    fn stuck_joint_does_not_drift() {
        // A constant 0.2 N·m drive against 0.442 N·m of friction.
        let p = JointParams {
            kp: 0.2,
            ..JointParams::saturn_shank()
        };
        let traj = simulate(&p, |_| 1.0, 2.0, 1e-5, JointState::default()).unwrap();
        assert!(traj
            .rows()
            .iter()
            .all(|r| r.theta == 0.0 && r.theta_dot == 0.0));
        assert!(traj.rows().iter().all(|r| r.tau_friction == -0.2));
    }

    #[test]
    fn step_equilibrium_fixed_point() {
        let p = JointParams::saturn_shank();
        let next = step(&p, &JointState::default(), 0.0, 1e-3).unwrap();
        assert_eq!(next, JointState::default());
    }

    #[test]
    fn frictionless_ballistic_step() {
        let p = JointParams {
            inertia: 0.5,
            ..unit_params()
        };
        // kp = 1, target = 2 → τ = 2.
        let next = step(&p, &JointState::default(), 2.0, 0.01).unwrap();
        assert_eq!(next.theta_dot, 2.0 / 0.5 * 0.01);
        assert_eq!(next.theta, next.theta_dot * 0.01);
    }

    #[test]
    fn step_rejects_bad_dt() {
        let p = unit_params();
        assert!(step(&p, &JointState::default(), 0.0, 0.0).is_err());
        assert!(step(&p, &JointState::default(), 0.0, -1e-3).is_err());
    }

    #[test]
    fn simulate_row_count() {
        let p = unit_params();
        let traj = simulate(&p, |_| 0.0, 1.0, 0.1, JointState::default()).unwrap();
        assert_eq!(traj.len(), 11);
        assert_eq!(sample_count(5.0, 1e-3), 5001);
    }

    #[test]
    fn simulate_equilibrium_rows_identical() {
        let p = JointParams::saturn_shank();
        let traj = simulate(&p, |_| 0.25, 1.0, 1e-3, JointState::at_rest(0.25)).unwrap();
        let first = traj.rows()[0];
        assert!(traj.rows().iter().all(|r| (
            r.target,
            r.theta,
            r.theta_dot,
            r.tau_pd,
            r.tau_friction
        ) == (
            first.target,
            first.theta,
            first.theta_dot,
            first.tau_pd,
            first.tau_friction
        )));
    }

    #[test]
    fn simulate_rejects_zero_duration() {
        let p = unit_params();
        assert!(simulate(&p, |_| 0.0, 0.0, 1e-3, JointState::default()).is_err());
    }

    #[test]
    fn action_mapping() {
        assert_eq!(action_to_target(0.0, -0.8), -0.8);
        assert!((action_to_target(0.3, -0.8) - -0.5).abs() < 1e-15);
        assert!((action_to_target(-0.3, -0.5) - -0.8).abs() < 1e-15);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = unit_params();
        p.inertia = 0.0;
        assert!(p.validate().is_err());
        let mut p = unit_params();
        p.coulomb = -0.1;
        assert!(p.validate().is_err());
    }

    #[test]
    fn params_json_keys() {
        let json = serde_json::to_value(JointParams::saturn_shank()).unwrap();
        for key in [
            "inertia_I",
            "viscous_B",
            "coulomb_bc",
            "motor_strength_k",
            "kp",
            "kd",
            "tau_max",
        ] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
    }
}
