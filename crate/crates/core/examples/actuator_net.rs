// Trains the actuator network on synthetic mixed-sine data and compares it
// with a linear model on the same history features.
//
// The full-size run (50 000 windows, 200 epochs) takes about 15 s in release
// mode: `cargo run --release --example actuator_net`. Pass a sample count and
// an epoch count to try smaller runs, e.g. `-- 10000 50`; on small datasets the
// linear model usually wins.

use frictionlab::actuator_net::{self, LinearBaseline, SyntheticConfig, TrainConfig};

fn sizes() -> (usize, usize) {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().ok());
    let samples = args.next().flatten().unwrap_or(50_000);
    let epochs = args.next().flatten().unwrap_or(200);
    (samples, epochs)
}

pub fn run_example() -> frictionlab::Result<()> {
    let (samples, epochs) = if cfg!(test) { (3_000, 10) } else { sizes() };
    let data = actuator_net::synthetic_dataset(&SyntheticConfig {
        samples,
        ..Default::default()
    })?;
    let outcome = actuator_net::train(
        &data,
        &TrainConfig {
            epochs,
            ..Default::default()
        },
    )?;

    let train = data.subset(&outcome.train_indices);
    let heldout = data.subset(&outcome.heldout_indices);
    let net = actuator_net::evaluate(&outcome.model, &heldout)?;
    let linear = LinearBaseline::fit(&train)?.evaluate(&heldout)?;
    println!("{} windows, {} held out", data.len(), heldout.len());
    println!("network: MSE {:.5}  R² {:.4}", net.mse, net.r2);
    println!("linear:  MSE {:.5}  R² {:.4}", linear.mse, linear.r2);
    Ok(())
}

#[allow(dead_code)]
fn main() -> frictionlab::Result<()> {
    run_example()
}
