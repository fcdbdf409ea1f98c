//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for runtime or numerical failures, 2 for usage
//! and validation errors (bad flags, unreadable or malformed inputs).

use std::f64::consts::PI;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::actuator_net::{
    self, ActuatorDataset, ActuatorNetModel, LinearBaseline, SyntheticConfig, TrainConfig,
};
use crate::domain_rand::{self, RandomizationConfig};
use crate::error::{Error, Result};
use crate::gait::{self, ContactLog};
use crate::joint::{self, JointParams, JointState};
use crate::manifest::ExperimentManifest;
use crate::sysid::{self, Excitation, FixedParams, IdentifyOptions, PhysicalParams};
use crate::trajectory::Trajectory;

#[derive(Debug, Parser)]
#[command(
    name = "frictionlab",
    version,
    about = "Joint friction modelling toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a joint tracking a sinusoid and write the trajectory CSV.
    Simulate(SimulateArgs),
    /// Identify inertia, damping and friction from a trajectory CSV.
    Identify(IdentifyArgs),
    /// Tabulate friction-to-torque ratios for joint parameter files.
    Table3(Table3Args),
    /// Actuator-net data generation, training and evaluation.
    Actnet {
        #[command(subcommand)]
        command: ActnetCommand,
    },
    /// Domain randomization sampling and the damping redundancy check.
    Dr {
        #[command(subcommand)]
        command: DrCommand,
    },
    /// Trot-gait rewards for a contact log.
    Gait(GaitArgs),
}

#[derive(Debug, Args)]
struct ExcitationArgs {
    /// Excitation amplitude (rad).
    #[arg(long = "A", default_value_t = 0.5)]
    amplitude: f64,
    /// Excitation angular frequency (rad/s).
    #[arg(long, default_value_t = 2.0 * PI)]
    omega: f64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    params: PathBuf,
    #[command(flatten)]
    excitation: ExcitationArgs,
    /// Constant added to the sinusoid (rad).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    offset: f64,
    #[arg(long, default_value_t = 5.0)]
    duration: f64,
    #[arg(long, default_value_t = joint::DEFAULT_DT)]
    dt: f64,
    /// Output CSV; stdout when omitted (no manifest is written then).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct IdentifyArgs {
    #[arg(long)]
    traj: PathBuf,
    /// JSON with motor_strength_k, kp, kd, tau_max and optionally initial.
    #[arg(long)]
    fixed: PathBuf,
    #[command(flatten)]
    excitation: ExcitationArgs,
    #[arg(long, default_value_t = 8)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Initial guess "I,B,b_c" around which starts are drawn.
    #[arg(long, value_delimiter = ',')]
    guess: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Table3Args {
    /// Joint parameter JSON files; each becomes one column named after the file.
    #[arg(required = true)]
    params: Vec<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum ActnetCommand {
    /// Simulate mixed-sine tracking and write one trajectory CSV per segment.
    GenData(GenDataArgs),
    /// Train an actuator net on trajectory CSVs and write the model JSON.
    Train(TrainArgs),
    /// Report MSE and R² of a trained model (and a linear fit) on trajectory CSVs.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
struct GenDataArgs {
    /// Joint parameters; Saturn shank values when omitted.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value_t = 50_000)]
    samples: usize,
    #[arg(long = "H", default_value_t = actuator_net::DEFAULT_HISTORY)]
    history: usize,
    #[arg(long, default_value_t = 10)]
    log_every: usize,
    #[arg(long, default_value_t = 1000)]
    segment_rows: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Trajectory CSV files or directories of them.
    #[arg(long, required = true, num_args = 1..)]
    data: Vec<PathBuf>,
    #[arg(long = "H", default_value_t = actuator_net::DEFAULT_HISTORY)]
    history: usize,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 64)]
    batch: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 32)]
    width: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, required = true, num_args = 1..)]
    data: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum DrCommand {
    /// Draw randomized joint and environment parameters.
    Sample(DrSampleArgs),
    /// Compare two parameter sets that differ only in B and kd.
    CheckDamping(CheckDampingArgs),
}

#[derive(Debug, Args)]
struct DrSampleArgs {
    /// Randomization config JSON; the bundled standard ranges when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Nominal joint parameters; Saturn shank values when omitted.
    #[arg(long)]
    nominal: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CheckDampingArgs {
    #[arg(long)]
    params: Option<PathBuf>,
    /// Second parameter set; defaults to the first with kd moved into B.
    #[arg(long)]
    params2: Option<PathBuf>,
    #[command(flatten)]
    excitation: ExcitationArgs,
    #[arg(long, default_value_t = 10.0)]
    duration: f64,
    #[arg(long, default_value_t = joint::DEFAULT_DT)]
    dt: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GaitArgs {
    #[arg(long)]
    contacts: PathBuf,
    #[arg(long = "H", default_value_t = gait::DEFAULT_UNSYNC_WINDOW)]
    history: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Runs the CLI and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Identify(a) => cmd_identify(a),
        Command::Table3(a) => cmd_table3(a),
        Command::Actnet { command } => match command {
            ActnetCommand::GenData(a) => cmd_gen_data(a),
            ActnetCommand::Train(a) => cmd_train(a),
            ActnetCommand::Eval(a) => cmd_eval(a),
        },
        Command::Dr { command } => match command {
            DrCommand::Sample(a) => cmd_dr_sample(a),
            DrCommand::CheckDamping(a) => cmd_check_damping(a),
        },
        Command::Gait(a) => cmd_gait(a),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_params(path: &Path) -> Result<JointParams> {
    let params: JointParams = read_json(path)?;
    params.validate()?;
    Ok(params)
}

fn load_trajectory(path: &Path) -> Result<Trajectory> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
    Trajectory::read_csv(std::io::BufReader::new(file))
}

fn to_json_text<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| runtime(format!("writing {}: {e}", p.display())))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| runtime(format!("writing stdout: {e}")))
        }
    }
}

fn runtime(msg: String) -> Error {
    Error::Output(msg)
}

fn finish_manifest(manifest: &mut ExperimentManifest, output: &Path) -> Result<()> {
    manifest.add_output(output);
    manifest
        .write_for(output)
        .map(|_| ())
        .map_err(|e| runtime(format!("writing manifest: {e}")))
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let params = load_params(&a.params)?;
    let ExcitationArgs { amplitude, omega } = a.excitation;
    for (name, v) in [("A", amplitude), ("omega", omega), ("offset", a.offset)] {
        if !v.is_finite() {
            return Err(Error::invalid(format!("--{name} must be finite")));
        }
    }
    let offset = a.offset;
    let traj = joint::simulate(
        &params,
        |t| offset + amplitude * (omega * t).sin(),
        a.duration,
        a.dt,
        JointState::at_rest(offset),
    )?;
    write_output(a.out.as_deref(), &traj.to_csv_string())?;
    if let Some(out) = &a.out {
        let mut m = ExperimentManifest::new(
            "simulate",
            None,
            json!({ "A": amplitude, "omega": omega, "offset": offset, "duration": a.duration, "dt": a.dt }),
        );
        m.add_input(&a.params)?;
        finish_manifest(&mut m, out)?;
    }
    Ok(())
}

fn cmd_identify(a: IdentifyArgs) -> Result<()> {
    let measured = load_trajectory(&a.traj)?;
    let fixed: FixedParams = read_json(&a.fixed)?;
    let exc = Excitation {
        amplitude: a.excitation.amplitude,
        omega: a.excitation.omega,
        duration: measured.duration(),
        dt: measured.dt(),
    };
    let mut options = IdentifyOptions {
        starts: a.starts,
        seed: a.seed,
        ..Default::default()
    };
    if let Some(g) = &a.guess {
        if g.len() != 3 {
            return Err(Error::invalid(format!(
                "--guess takes three values I,B,b_c; got {}",
                g.len()
            )));
        }
        options.initial_guess = PhysicalParams {
            inertia: g[0],
            viscous: g[1],
            coulomb: g[2],
        };
    }
    let result = sysid::identify(&measured, &fixed, &exc, &options)?;
    write_output(a.out.as_deref(), &to_json_text(&result)?)?;
    if let Some(out) = &a.out {
        let mut m = ExperimentManifest::new(
            "identify",
            Some(a.seed),
            json!({
                "A": exc.amplitude,
                "omega": exc.omega,
                "starts": a.starts,
                "guess": options.initial_guess,
            }),
        );
        m.add_input(&a.traj)?;
        m.add_input(&a.fixed)?;
        finish_manifest(&mut m, out)?;
    }
    Ok(())
}

/// Rounds toward zero to `digits` significant digits, returning the value
/// and its decimal text (e.g. 0.1353 → "0.13").
pub fn round_significant_toward_zero(x: f64, digits: u32) -> (f64, String) {
    if x == 0.0 || !x.is_finite() {
        return (x, format!("{x}"));
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0);
    let scale = 10f64.powi(digits as i32 - 1 - magnitude);
    // The relative nudge keeps exact decimals such as 0.13 from truncating to 0.12.
    let truncated = (x * scale * (1.0 + 1e-12)).trunc() / scale;
    (
        truncated,
        format!("{truncated:.prec$}", prec = decimals as usize),
    )
}

#[derive(Debug, Serialize)]
struct Table3Row {
    name: String,
    #[serde(rename = "inertia_I")]
    inertia: f64,
    #[serde(rename = "viscous_B")]
    viscous: f64,
    #[serde(rename = "coulomb_bc")]
    coulomb: f64,
    tau_max: f64,
    ratio_percent: f64,
    ratio_percent_2sig: String,
}

fn cmd_table3(a: Table3Args) -> Result<()> {
    let mut rows = Vec::new();
    for path in &a.params {
        let p = load_params(path)?;
        let ratio = sysid::friction_ratio(p.coulomb, p.tau_max)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        rows.push(Table3Row {
            name,
            inertia: p.inertia,
            viscous: p.viscous,
            coulomb: p.coulomb,
            tau_max: p.tau_max,
            ratio_percent: ratio,
            ratio_percent_2sig: round_significant_toward_zero(ratio, 2).1,
        });
    }

    let mut text = String::from("SHANK MOTORS COMPARISON\n");
    let line = |label: &str, cells: Vec<String>| {
        let mut s = format!("{label:<28}");
        for c in cells {
            s.push_str(&format!("{c:>14}"));
        }
        s.push('\n');
        s
    };
    text.push_str(&line(
        "Property",
        rows.iter().map(|r| r.name.clone()).collect(),
    ));
    text.push_str(&line(
        "Inertia (kg·m²)",
        rows.iter().map(|r| r.inertia.to_string()).collect(),
    ));
    text.push_str(&line(
        "Viscous friction (N·m·s/rad)",
        rows.iter().map(|r| r.viscous.to_string()).collect(),
    ));
    text.push_str(&line(
        "Static friction (N·m)",
        rows.iter().map(|r| r.coulomb.to_string()).collect(),
    ));
    text.push_str(&line(
        "Torque limit (N·m)",
        rows.iter().map(|r| r.tau_max.to_string()).collect(),
    ));
    text.push_str(&line(
        "f / tau_max ratio (%)",
        rows.iter().map(|r| r.ratio_percent_2sig.clone()).collect(),
    ));
    write_output(None, &text)?;

    if let Some(out) = &a.json {
        write_output(Some(out), &to_json_text(&json!({ "rows": rows }))?)?;
        let mut m = ExperimentManifest::new("table3", None, json!({}));
        for p in &a.params {
            m.add_input(p)?;
        }
        finish_manifest(&mut m, out)?;
    }
    Ok(())
}

fn cmd_gen_data(a: GenDataArgs) -> Result<()> {
    let params = match &a.params {
        Some(p) => load_params(p)?,
        None => JointParams::saturn_shank(),
    };
    let config = SyntheticConfig {
        params,
        samples: a.samples,
        history: a.history,
        segment_rows: a.segment_rows,
        log_every: a.log_every,
        seed: a.seed,
        ..Default::default()
    };
    let segments = actuator_net::generate_trajectories(&config)?;
    std::fs::create_dir_all(&a.out)
        .map_err(|e| runtime(format!("creating {}: {e}", a.out.display())))?;
    let mut m = ExperimentManifest::new(
        "actnet gen-data",
        Some(a.seed),
        serde_json::to_value(&config)?,
    );
    if let Some(p) = &a.params {
        m.add_input(p)?;
    }
    for (i, seg) in segments.iter().enumerate() {
        let path = a.out.join(format!("segment_{i:04}.csv"));
        write_output(Some(&path), &seg.to_csv_string())?;
        m.add_output(&path);
    }
    m.write_for(&a.out.join("dataset"))
        .map_err(|e| runtime(format!("writing manifest: {e}")))?;
    eprintln!(
        "wrote {} segments, {} windows",
        segments.len(),
        config.samples
    );
    Ok(())
}

fn collect_csvs(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut in_dir: Vec<PathBuf> = std::fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "csv"))
                .collect();
            in_dir.sort();
            files.extend(in_dir);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        return Err(Error::invalid("no trajectory CSV files found"));
    }
    Ok(files)
}

fn load_dataset(paths: &[PathBuf], history: usize) -> Result<(ActuatorDataset, Vec<PathBuf>)> {
    let files = collect_csvs(paths)?;
    let trajectories = files
        .iter()
        .map(|f| load_trajectory(f))
        .collect::<Result<Vec<_>>>()?;
    Ok((
        ActuatorDataset::from_trajectories(&trajectories, history)?,
        files,
    ))
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let (data, files) = load_dataset(&a.data, a.history)?;
    let config = TrainConfig {
        epochs: a.epochs,
        batch_size: a.batch,
        learning_rate: a.lr,
        hidden_width: a.width,
        seed: a.seed,
        ..Default::default()
    };
    let outcome = actuator_net::train(&data, &config)?;
    write_output(Some(&a.out), &(outcome.model.to_json()? + "\n"))?;
    eprintln!(
        "final training loss {:.6e} (normalised), held-out MSE {:.6e} (N·m)²",
        outcome.epoch_losses.last().copied().unwrap_or(f64::NAN),
        outcome.heldout_mse
    );
    let mut m = ExperimentManifest::new(
        "actnet train",
        Some(a.seed),
        json!({ "H": a.history, "config": config, "heldout_mse": outcome.heldout_mse }),
    );
    for f in &files {
        m.add_input(f)?;
    }
    finish_manifest(&mut m, &a.out)
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.model)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", a.model.display())))?;
    let model = ActuatorNetModel::from_json(&text)?;
    let (data, files) = load_dataset(&a.data, model.history)?;
    let metrics = actuator_net::evaluate(&model, &data)?;
    let baseline = LinearBaseline::fit(&data)?.evaluate(&data)?;
    let report = json!({ "model": metrics, "linear_baseline_in_sample": baseline });
    write_output(a.out.as_deref(), &to_json_text(&report)?)?;
    if let Some(out) = &a.out {
        let mut m = ExperimentManifest::new("actnet eval", None, json!({}));
        m.add_input(&a.model)?;
        for f in &files {
            m.add_input(f)?;
        }
        finish_manifest(&mut m, out)?;
    }
    Ok(())
}

fn cmd_dr_sample(a: DrSampleArgs) -> Result<()> {
    let config = match &a.config {
        Some(p) => {
            let c: RandomizationConfig = read_json(p)?;
            c.validate()?;
            c
        }
        None => RandomizationConfig::standard(),
    };
    let nominal = match &a.nominal {
        Some(p) => load_params(p)?,
        None => JointParams::saturn_shank(),
    };
    let samples = domain_rand::sample_many(&config, &nominal, a.seed, a.n)?;
    write_output(a.out.as_deref(), &to_json_text(&samples)?)?;
    if let Some(out) = &a.out {
        let mut m = ExperimentManifest::new("dr sample", Some(a.seed), json!({ "n": a.n }));
        for p in a.config.iter().chain(&a.nominal) {
            m.add_input(p)?;
        }
        finish_manifest(&mut m, out)?;
    }
    Ok(())
}

fn cmd_check_damping(a: CheckDampingArgs) -> Result<()> {
    let p1 = match &a.params {
        Some(p) => load_params(p)?,
        None => JointParams::saturn_shank(),
    };
    let p2 = match &a.params2 {
        Some(p) => load_params(p)?,
        None => JointParams {
            viscous: p1.effective_damping(),
            kd: 0.0,
            ..p1
        },
    };
    let ExcitationArgs { amplitude, omega } = a.excitation;
    let diff = domain_rand::damping_equivalence_check(
        &p1,
        &p2,
        |t| amplitude * (omega * t).sin(),
        a.duration,
        a.dt,
    )?;
    let report = json!({
        "p1": p1,
        "p2": p2,
        "effective_damping": [p1.effective_damping(), p2.effective_damping()],
        "on_manifold": p1.effective_damping() == p2.effective_damping(),
        "max_abs_theta_diff": diff,
    });
    write_output(a.out.as_deref(), &to_json_text(&report)?)?;
    if let Some(out) = &a.out {
        let mut m = ExperimentManifest::new(
            "dr check-damping",
            None,
            json!({ "A": amplitude, "omega": omega, "duration": a.duration, "dt": a.dt }),
        );
        for p in a.params.iter().chain(&a.params2) {
            m.add_input(p)?;
        }
        finish_manifest(&mut m, out)?;
    }
    Ok(())
}

fn cmd_gait(a: GaitArgs) -> Result<()> {
    let log = ContactLog::load(&a.contacts).map_err(|e| match e {
        Error::Io(io) => Error::invalid(format!("cannot read {}: {io}", a.contacts.display())),
        other => other,
    })?;
    let series = gait::reward_series(&log, a.history)?;
    write_output(a.out.as_deref(), &to_json_text(&series)?)?;
    if let Some(out) = &a.out {
        let mut m = ExperimentManifest::new("gait", None, json!({ "H": a.history }));
        m.add_input(&a.contacts)?;
        finish_manifest(&mut m, out)?;
    }
    Ok(())
}
