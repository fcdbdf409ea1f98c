//! Domain randomization of joint and environment parameters.
//!
//! Joint multipliers scale a nominal (identified) [`JointParams`]: armature
//! scales inertia, damping scales `B`, static friction scales `b_c`, and the
//! gain and motor-strength multipliers scale `kp` and `k_motor`. `kd` is not
//! randomized since, away from torque saturation, it only enters the dynamics
//! through `B + k_motor·kd` (see [`damping_equivalence_check`]).
//!
//! Every field is drawn from its own ChaCha stream keyed by `(seed, episode,
//! field)`, so draws do not depend on evaluation order or on which other
//! fields exist.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::joint::{self, JointParams, JointState};

/// The bundled Table-II style configuration.
pub const DEFAULT_CONFIG_JSON: &str = include_str!("../data/randomization.json");

/// Closed interval `[lo, hi]`, serialised as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl From<[f64; 2]> for Range {
    fn from(v: [f64; 2]) -> Self {
        Self { lo: v[0], hi: v[1] }
    }
}

impl From<Range> for [f64; 2] {
    fn from(r: Range) -> Self {
        [r.lo, r.hi]
    }
}

impl Range {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub const fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    fn check(&self, name: &str, non_negative: bool) -> Result<()> {
        ensure_finite(name, self.lo)?;
        ensure_finite(name, self.hi)?;
        if self.lo > self.hi {
            return Err(Error::invalid(format!(
                "{name}: lo {} > hi {}",
                self.lo, self.hi
            )));
        }
        if non_negative && self.lo < 0.0 {
            return Err(Error::invalid(format!("{name}: multipliers must be >= 0")));
        }
        Ok(())
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.random();
        // u ∈ [0, 1) keeps the draw inside [lo, hi]; the min guards rounding.
        (self.lo + (self.hi - self.lo) * u).min(self.hi)
    }
}

/// Whether each joint gets its own multipliers or all joints share one draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierScope {
    #[default]
    PerJoint,
    Shared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomizationConfig {
    pub joint_armature_mult: Range,
    pub joint_damping_mult: Range,
    pub joint_static_friction_mult: Range,
    pub kp_mult: Range,
    pub motor_strength_mult: Range,
    pub ground_friction_mult: Range,
    pub payload_kg: Range,
    pub com_offset_m: Range,
    /// Carried through to samples; nothing here simulates base pushes.
    pub push_interval_s: f64,
    pub push_velocity_mps: f64,
    #[serde(default)]
    pub scope: MultiplierScope,
}

impl Default for RandomizationConfig {
    fn default() -> Self {
        Self::standard()
    }
}

impl RandomizationConfig {
    pub fn standard() -> Self {
        serde_json::from_str(DEFAULT_CONFIG_JSON).expect("bundled randomization.json is valid")
    }

    /// All multipliers pinned to 1 and payload/CoM offset to 0.
    pub fn degenerate() -> Self {
        Self {
            joint_armature_mult: Range::point(1.0),
            joint_damping_mult: Range::point(1.0),
            joint_static_friction_mult: Range::point(1.0),
            kp_mult: Range::point(1.0),
            motor_strength_mult: Range::point(1.0),
            ground_friction_mult: Range::point(1.0),
            payload_kg: Range::point(0.0),
            com_offset_m: Range::point(0.0),
            ..Self::standard()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, range) in self.multiplier_ranges() {
            range.check(name, true)?;
        }
        self.payload_kg.check("payload_kg", false)?;
        self.com_offset_m.check("com_offset_m", false)?;
        for (name, v) in [
            ("push_interval_s", self.push_interval_s),
            ("push_velocity_mps", self.push_velocity_mps),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    fn multiplier_ranges(&self) -> [(&'static str, Range); 6] {
        [
            ("joint_armature_mult", self.joint_armature_mult),
            ("joint_damping_mult", self.joint_damping_mult),
            (
                "joint_static_friction_mult",
                self.joint_static_friction_mult,
            ),
            ("kp_mult", self.kp_mult),
            ("motor_strength_mult", self.motor_strength_mult),
            ("ground_friction_mult", self.ground_friction_mult),
        ]
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointMultipliers {
    pub armature: f64,
    pub damping: f64,
    pub static_friction: f64,
    pub kp: f64,
    pub motor_strength: f64,
}

impl JointMultipliers {
    pub fn apply(&self, nominal: &JointParams) -> JointParams {
        JointParams {
            inertia: nominal.inertia * self.armature,
            viscous: nominal.viscous * self.damping,
            coulomb: nominal.coulomb * self.static_friction,
            kp: nominal.kp * self.kp,
            motor_strength: nominal.motor_strength * self.motor_strength,
            ..*nominal
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDraw {
    pub multipliers: JointMultipliers,
    pub params: JointParams,
}

/// One concrete draw of every randomized quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSample {
    pub seed: u64,
    pub episode: u64,
    pub joints: Vec<JointDraw>,
    pub ground_friction_mult: f64,
    pub payload_kg: f64,
    pub com_offset_m: f64,
    pub push_interval_s: f64,
    pub push_velocity_mps: f64,
}

impl EnvironmentSample {
    /// Randomized parameters of the first (or only) joint.
    pub fn joint(&self) -> &JointParams {
        &self.joints[0].params
    }

    /// Whether every drawn value lies in its configured range.
    pub fn within(&self, config: &RandomizationConfig) -> bool {
        let joints_ok = self.joints.iter().all(|j| {
            let m = &j.multipliers;
            config.joint_armature_mult.contains(m.armature)
                && config.joint_damping_mult.contains(m.damping)
                && config
                    .joint_static_friction_mult
                    .contains(m.static_friction)
                && config.kp_mult.contains(m.kp)
                && config.motor_strength_mult.contains(m.motor_strength)
        });
        joints_ok
            && config
                .ground_friction_mult
                .contains(self.ground_friction_mult)
            && config.payload_kg.contains(self.payload_kg)
            && config.com_offset_m.contains(self.com_offset_m)
    }
}

// Stream layout inside one episode: 3 environment fields, then 5 per joint.
const ENV_FIELDS: u64 = 3;
const JOINT_FIELDS: u64 = 5;
const STREAMS_PER_EPISODE: u64 = 1 << 24;

fn field_rng(seed: u64, episode: u64, slot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(episode.wrapping_mul(STREAMS_PER_EPISODE).wrapping_add(slot));
    rng
}

fn draw_field(range: &Range, seed: u64, episode: u64, slot: u64) -> f64 {
    range.draw(&mut field_rng(seed, episode, slot))
}

fn draw_multipliers(
    config: &RandomizationConfig,
    seed: u64,
    episode: u64,
    joint: u64,
) -> JointMultipliers {
    let base = ENV_FIELDS + joint * JOINT_FIELDS;
    JointMultipliers {
        armature: draw_field(&config.joint_armature_mult, seed, episode, base),
        damping: draw_field(&config.joint_damping_mult, seed, episode, base + 1),
        static_friction: draw_field(&config.joint_static_friction_mult, seed, episode, base + 2),
        kp: draw_field(&config.kp_mult, seed, episode, base + 3),
        motor_strength: draw_field(&config.motor_strength_mult, seed, episode, base + 4),
    }
}

/// Randomizes every joint of a robot for one episode.
pub fn sample_robot(
    config: &RandomizationConfig,
    nominals: &[JointParams],
    seed: u64,
    episode: u64,
) -> Result<EnvironmentSample> {
    config.validate()?;
    if nominals.is_empty() {
        return Err(Error::invalid("at least one nominal joint is required"));
    }
    if (nominals.len() as u64) * JOINT_FIELDS + ENV_FIELDS > STREAMS_PER_EPISODE {
        return Err(Error::invalid("too many joints"));
    }
    let mut joints = Vec::with_capacity(nominals.len());
    for (j, nominal) in nominals.iter().enumerate() {
        nominal.validate()?;
        let slot = match config.scope {
            MultiplierScope::PerJoint => j as u64,
            MultiplierScope::Shared => 0,
        };
        let multipliers = draw_multipliers(config, seed, episode, slot);
        let params = multipliers.apply(nominal);
        params.validate().map_err(|e| {
            Error::invalid(format!(
                "randomized joint {j} violates joint invariants: {e}"
            ))
        })?;
        joints.push(JointDraw {
            multipliers,
            params,
        });
    }
    Ok(EnvironmentSample {
        seed,
        episode,
        joints,
        ground_friction_mult: draw_field(&config.ground_friction_mult, seed, episode, 0),
        payload_kg: draw_field(&config.payload_kg, seed, episode, 1),
        com_offset_m: draw_field(&config.com_offset_m, seed, episode, 2),
        push_interval_s: config.push_interval_s,
        push_velocity_mps: config.push_velocity_mps,
    })
}

/// One uniform draw for a single joint. Deterministic in `(config, nominal, seed)`.
pub fn sample(
    config: &RandomizationConfig,
    nominal: &JointParams,
    seed: u64,
) -> Result<EnvironmentSample> {
    sample_robot(config, std::slice::from_ref(nominal), seed, 0)
}

/// `n` consecutive episodes drawn from the same seed.
pub fn sample_many(
    config: &RandomizationConfig,
    nominal: &JointParams,
    seed: u64,
    n: usize,
) -> Result<Vec<EnvironmentSample>> {
    (0..n as u64)
        .map(|episode| sample_robot(config, std::slice::from_ref(nominal), seed, episode))
        .collect()
}

/// Standard ranges around an identified friction value, with the friction
/// multiplier reaching down to zero so training also sees friction-free joints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeceptionPlan {
    pub config: RandomizationConfig,
    pub nominal_coulomb: f64,
    /// Effective `b_c` interval (N·m) after applying the multiplier range.
    pub coulomb_range: Range,
}

pub fn deception_config(identified_coulomb: f64) -> Result<DeceptionPlan> {
    ensure_finite("identified_bc", identified_coulomb)?;
    if identified_coulomb < 0.0 {
        return Err(Error::invalid(format!(
            "identified friction must be >= 0, got {identified_coulomb}"
        )));
    }
    let mut config = RandomizationConfig::standard();
    config.joint_static_friction_mult = Range::new(0.0, 1.2);
    let m = config.joint_static_friction_mult;
    Ok(DeceptionPlan {
        coulomb_range: Range::new(m.lo * identified_coulomb, m.hi * identified_coulomb),
        nominal_coulomb: identified_coulomb,
        config,
    })
}

/// Simulates two parameter sets under the same target and returns the largest
/// absolute angle difference (rad).
///
/// Both sets must agree on everything except `B` and `kd`. The result is
/// exactly zero when `B + k_motor·kd` matches (and the PD torque never
/// saturates).
pub fn damping_equivalence_check<F>(
    p1: &JointParams,
    p2: &JointParams,
    target_fn: F,
    duration: f64,
    dt: f64,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let same = p1.inertia == p2.inertia
        && p1.kp == p2.kp
        && p1.motor_strength == p2.motor_strength
        && p1.coulomb == p2.coulomb
        && p1.tau_max == p2.tau_max;
    if !same {
        return Err(Error::invalid(
            "damping comparison needs equal I, kp, k_motor, b_c and tau_max",
        ));
    }
    let a = joint::simulate(p1, &target_fn, duration, dt, JointState::default())?;
    let b = joint::simulate(p2, &target_fn, duration, dt, JointState::default())?;
    Ok(a.thetas()
        .zip(b.thetas())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn bundled_default_values() {
        let c = RandomizationConfig::standard();
        c.validate().unwrap();
        assert_eq!(c.joint_static_friction_mult, Range::new(0.0, 1.2));
        assert_eq!(c.kp_mult, Range::new(0.95, 1.05));
        assert_eq!(c.ground_friction_mult, Range::new(0.2, 2.0));
        assert_eq!(c.payload_kg, Range::new(-2.0, 3.0));
        assert_eq!(c.com_offset_m, Range::new(-0.25, 0.25));
        assert_eq!((c.push_interval_s, c.push_velocity_mps), (8.0, 1.0));
    }

    #[test]
    fn degenerate_config_echoes_nominal() {
        let nominal = JointParams::saturn_shank();
        let s = sample(&RandomizationConfig::degenerate(), &nominal, 17).unwrap();
        assert_eq!(*s.joint(), nominal);
        assert_eq!(
            (s.payload_kg, s.com_offset_m, s.ground_friction_mult),
            (0.0, 0.0, 1.0)
        );
    }

    #[test]
    fn same_seed_same_sample() {
        let c = RandomizationConfig::standard();
        let n = JointParams::saturn_shank();
        assert_eq!(sample(&c, &n, 42).unwrap(), sample(&c, &n, 42).unwrap());
        assert_ne!(sample(&c, &n, 42).unwrap(), sample(&c, &n, 43).unwrap());
    }

    #[test]
    fn friction_multiplier_in_table_range() {
        let c = RandomizationConfig::standard();
        let n = JointParams::saturn_shank();
        for seed in 0..200 {
            let s = sample(&c, &n, seed).unwrap();
            assert!((0.0..=1.2).contains(&s.joints[0].multipliers.static_friction));
            assert!(s.within(&c));
        }
    }

    #[test]
    fn invalid_inputs() {
        let mut c = RandomizationConfig::standard();
        c.kp_mult = Range::new(1.1, 0.9);
        assert!(sample(&c, &JointParams::saturn_shank(), 0).is_err());
        let mut c = RandomizationConfig::standard();
        c.joint_damping_mult = Range::new(-0.1, 1.0);
        assert!(c.validate().is_err());
        let bad = JointParams {
            inertia: -1.0,
            ..JointParams::saturn_shank()
        };
        assert!(sample(&RandomizationConfig::standard(), &bad, 0).is_err());
    }

    #[test]
    fn shared_scope_reuses_multipliers() {
        let c = RandomizationConfig {
            scope: MultiplierScope::Shared,
            ..RandomizationConfig::standard()
        };
        let nominals = [JointParams::saturn_shank(), JointParams::go1_shank()];
        let s = sample_robot(&c, &nominals, 5, 0).unwrap();
        assert_eq!(s.joints[0].multipliers, s.joints[1].multipliers);
        let per = sample_robot(&RandomizationConfig::standard(), &nominals, 5, 0).unwrap();
        assert_ne!(per.joints[0].multipliers, per.joints[1].multipliers);
        // Joint 0 draws do not depend on how many joints follow.
        let single = sample_robot(&RandomizationConfig::standard(), &nominals[..1], 5, 0).unwrap();
        assert_eq!(single.joints[0], per.joints[0]);
    }

    #[test]
    fn deception_range() {
        let plan = deception_config(0.442).unwrap();
        assert_eq!(plan.coulomb_range.lo, 0.0);
        assert!((plan.coulomb_range.hi - 0.5304).abs() < 1e-12);
        let zero = deception_config(0.0).unwrap();
        assert_eq!(zero.coulomb_range, Range::new(0.0, 0.0));
        assert!(deception_config(-0.1).is_err());
    }

    #[test]
    fn damping_pair_on_manifold() {
        let p1 = JointParams {
            viscous: 0.05,
            kd: 0.02,
            ..JointParams::saturn_shank()
        };
        let p2 = JointParams {
            viscous: 0.07,
            kd: 0.0,
            ..p1
        };
        assert_eq!(p1.effective_damping(), p2.effective_damping());
        let target = |t: f64| 0.5 * (2.0 * PI * t).sin();
        assert_eq!(
            damping_equivalence_check(&p1, &p2, target, 10.0, 1e-3).unwrap(),
            0.0
        );
        assert_eq!(
            damping_equivalence_check(&p1, &p1, target, 10.0, 1e-3).unwrap(),
            0.0
        );

        let doubled = JointParams {
            viscous: 2.0 * p1.effective_damping(),
            kd: 0.0,
            ..p1
        };
        assert!(damping_equivalence_check(&p1, &doubled, target, 10.0, 1e-3).unwrap() > 1e-6);
    }

    #[test]
    fn damping_check_precondition() {
        let p1 = JointParams::saturn_shank();
        let p2 = JointParams { kp: 7.0, ..p1 };
        assert!(damping_equivalence_check(&p1, &p2, |_| 0.1, 1.0, 1e-3).is_err());
    }
}
