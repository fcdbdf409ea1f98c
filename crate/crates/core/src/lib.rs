//! Single-joint actuator modelling with Coulomb friction and stiction.
//!
//! The crate is organised around one physical model, a PD-controlled joint
//! with viscous damping and Coulomb friction (with an exact sticking regime),
//! and the tools that consume it:
//!
//! * [`joint`] simulates the joint with a semi-implicit Euler integrator.
//! * [`sysid`] identifies inertia, damping and friction from a sampled
//!   sinusoidal tracking experiment by multi-start Nelder-Mead.
//! * [`actuator_net`] trains a small MLP that regresses actuator torque from
//!   joint position/velocity history.
//! * [`domain_rand`] samples randomized joint and environment parameters,
//!   including a static-friction range widened down to zero.
//! * [`gait`] scores hexapod contact sequences against the alternating-tripod
//!   trot pattern.
//!
//! The `frictionlab` binary wires these into reproducible batch commands; see
//! [`cli`].

pub mod actuator_net;
pub mod cli;
pub mod domain_rand;
pub mod error;
pub mod gait;
pub mod joint;
pub mod manifest;
pub mod sysid;
pub mod trajectory;

pub use error::{Error, Result};
pub use joint::{JointParams, JointState};
pub use trajectory::{Trajectory, TrajectoryRow};
