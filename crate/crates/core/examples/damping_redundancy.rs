// Viscous damping and the derivative gain act on the same velocity term, so
// parameter sets with equal `B + k·kd` produce identical motion.

use frictionlab::domain_rand::damping_equivalence_check;
use frictionlab::JointParams;
use std::f64::consts::PI;

pub fn run_example() -> frictionlab::Result<()> {
    let p1 = JointParams::saturn_shank();
    let moved = JointParams {
        viscous: p1.effective_damping(),
        kd: 0.0,
        ..p1
    };
    let perturbed = JointParams {
        viscous: p1.viscous * 1.1,
        ..p1
    };
    let target = |t: f64| 0.5 * (2.0 * PI * t).sin();

    let same = damping_equivalence_check(&p1, &moved, target, 10.0, 1e-3)?;
    let different = damping_equivalence_check(&p1, &perturbed, target, 10.0, 1e-3)?;
    println!("kd folded into B:   max |Δθ| = {same:e} rad");
    println!("B increased by 10%: max |Δθ| = {different:.3e} rad");
    assert_eq!(same, 0.0);
    Ok(())
}

#[allow(dead_code)]
fn main() -> frictionlab::Result<()> {
    run_example()
}
