// Draws randomized joint and environment parameters and shows the friction
// range used when the policy should not rely on friction being present.

use frictionlab::domain_rand::{self, RandomizationConfig};
use frictionlab::JointParams;

pub fn run_example() -> frictionlab::Result<()> {
    let config = RandomizationConfig::default();
    let nominal = JointParams::saturn_shank();

    // Six legs, three joints each; every joint gets its own multipliers.
    let robot = vec![nominal; 18];
    for episode in 0..3 {
        let s = domain_rand::sample_robot(&config, &robot, 42, episode)?;
        let bc: Vec<String> = s
            .joints
            .iter()
            .take(3)
            .map(|j| format!("{:.3}", j.params.coulomb))
            .collect();
        println!(
            "episode {episode}: ground x{:.2}, payload {:.2} kg, CoM {:+.3} m, first b_c [{}]",
            s.ground_friction_mult,
            s.payload_kg,
            s.com_offset_m,
            bc.join(", ")
        );
        assert!(s.within(&config));
    }

    let plan = domain_rand::deception_config(nominal.coulomb)?;
    println!(
        "friction-free training: b_c drawn from [{}, {:.4}] N·m",
        plan.coulomb_range.lo, plan.coulomb_range.hi
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> frictionlab::Result<()> {
    run_example()
}
