// Simulates the Saturn shank joint tracking a 1 Hz sinusoid and shows how
// friction holds the joint still once the command stops.
//
// Run with `cargo run --example simulate_joint`.

use frictionlab::joint::{self, JointParams, JointState};
use std::f64::consts::PI;

pub fn run_example() -> frictionlab::Result<()> {
    let params = JointParams::saturn_shank();
    let traj = joint::simulate(
        &params,
        |t| 0.5 * (2.0 * PI * t).sin(),
        5.0,
        joint::DEFAULT_DT,
        JointState::at_rest(0.0),
    )?;

    let rows = traj.rows();
    let rms_error = (rows
        .iter()
        .map(|r| (r.target - r.theta).powi(2))
        .sum::<f64>()
        / rows.len() as f64)
        .sqrt();
    let stuck = rows.iter().filter(|r| r.theta_dot == 0.0).count();
    println!("{} samples over {:.1} s", traj.len(), traj.duration());
    println!("tracking RMS error: {rms_error:.4} rad");
    println!("samples with the joint stuck: {stuck}");

    // With the target held at the current angle there is no torque to
    // overcome b_c, so a slowly drifting joint stays put.
    let hold = joint::simulate(
        &params,
        |_| 0.2,
        1.0,
        joint::DEFAULT_DT,
        JointState::new(0.2, 1e-5)?,
    )?;
    let last = hold.rows().last().expect("non-empty trajectory");
    println!(
        "holding 0.2 rad: final theta {:.6}, theta_dot {}",
        last.theta, last.theta_dot
    );
    assert_eq!(last.theta_dot, 0.0);
    Ok(())
}

#[allow(dead_code)]
fn main() -> frictionlab::Result<()> {
    run_example()
}
