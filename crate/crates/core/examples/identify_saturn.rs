// Recovers inertia, viscous damping and Coulomb friction from a simulated
// excitation, with and without encoder noise.
//
// Run with `cargo run --release --example identify_saturn`.

use frictionlab::sysid::{self, Excitation, FixedParams, IdentifyOptions, PhysicalParams};
use frictionlab::JointParams;

pub fn run_example() -> frictionlab::Result<()> {
    let truth = JointParams::saturn_shank();
    let exc = Excitation::default();
    let fixed = FixedParams::from_joint(&truth);
    let clean = exc.run(&truth, fixed.initial)?;
    let reference = PhysicalParams::of(&truth);

    for sigma in [0.0, 1e-3] {
        let measured = clean.with_position_noise(sigma, 1)?;
        let result = sysid::identify(&measured, &fixed, &exc, &IdentifyOptions::default())?;
        let est = result.estimate();
        println!(
            "sigma {sigma:.0e}: I {:.5}  B {:.5}  b_c {:.4}  (max rel. error {:.2e}, {} evaluations)",
            est.inertia,
            est.viscous,
            est.coulomb,
            est.max_relative_error(&reference),
            result.evaluations
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> frictionlab::Result<()> {
    run_example()
}
