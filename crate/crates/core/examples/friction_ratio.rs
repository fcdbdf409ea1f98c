// Compares how much of each motor's torque budget is spent on static friction.

use frictionlab::sysid::friction_ratio;
use frictionlab::JointParams;

pub fn run_example() -> frictionlab::Result<()> {
    for (name, p) in [
        ("Go1", JointParams::go1_shank()),
        ("Saturn", JointParams::saturn_shank()),
    ] {
        let ratio = friction_ratio(p.coulomb, p.tau_max)?;
        let (_, text) = frictionlab::cli::round_significant_toward_zero(ratio, 2);
        println!(
            "{name:<7} b_c = {:<7} N·m  tau_max = {:<6} N·m  ratio = {text}% ({ratio:.5}%)",
            p.coulomb, p.tau_max
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> frictionlab::Result<()> {
    run_example()
}
