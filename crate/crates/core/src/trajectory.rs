//! Uniformly sampled joint trajectories and their CSV form.
//!
//! The CSV header is `t,target,theta,theta_dot,tau_pd,tau_friction`. Values are
//! written as shortest round-trip decimals so reading a file back reproduces
//! every `f64` exactly.

use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 6] = [
    "t",
    "target",
    "theta",
    "theta_dot",
    "tau_pd",
    "tau_friction",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub target: f64,
    pub theta: f64,
    pub theta_dot: f64,
    pub tau_pd: f64,
    pub tau_friction: f64,
}

impl TrajectoryRow {
    fn values(&self) -> [f64; 6] {
        [
            self.t,
            self.target,
            self.theta,
            self.theta_dot,
            self.tau_pd,
            self.tau_friction,
        ]
    }

    /// Net actuator torque `τ_pd + f`.
    pub fn net_torque(&self) -> f64 {
        self.tau_pd + self.tau_friction
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dt: f64,
    rows: Vec<TrajectoryRow>,
}

impl Trajectory {
    /// Builds a trajectory, checking that samples are finite and that row `i`
    /// sits at `t_0 + i·dt`.
    pub fn new(dt: f64, rows: Vec<TrajectoryRow>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!(
                "trajectory dt must be > 0, got {dt}"
            )));
        }
        if rows.is_empty() {
            return Err(Error::invalid("trajectory has no rows"));
        }
        let t0 = rows[0].t;
        for (i, row) in rows.iter().enumerate() {
            if row.values().iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("non-finite value in row {i}")));
            }
            let expected = t0 + i as f64 * dt;
            if (row.t - expected).abs() > 1e-9 * dt.max(expected.abs()) {
                return Err(Error::invalid(format!(
                    "row {i} has t = {} but uniform sampling at dt = {dt} expects {expected}",
                    row.t
                )));
            }
        }
        Ok(Self { dt, rows })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn rows(&self) -> &[TrajectoryRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.rows[self.rows.len() - 1].t - self.rows[0].t
    }

    pub fn thetas(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.theta)
    }

    /// Keeps every `every`-th row, as if the trajectory had been logged at a
    /// lower rate.
    pub fn decimate(&self, every: usize) -> Result<Self> {
        if every == 0 {
            return Err(Error::invalid("decimation factor must be >= 1"));
        }
        let rows = self.rows.iter().step_by(every).copied().collect();
        Self::new(self.dt * every as f64, rows)
    }

    /// Copy with i.i.d. Gaussian noise of standard deviation `sigma` added to
    /// every measured angle. Everything else, including `theta_dot`, is kept.
    pub fn with_position_noise(&self, sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::invalid(format!(
                "noise sigma must be finite and >= 0, got {sigma}"
            )));
        }
        let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = self
            .rows
            .iter()
            .map(|r| TrajectoryRow {
                theta: r.theta + normal.sample(&mut rng),
                ..*r
            })
            .collect();
        Self::new(self.dt, rows)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CSV_HEADER)?;
        for row in &self.rows {
            // `Display` for f64 is the shortest string that parses back exactly.
            w.write_record(row.values().iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }

    /// Parses a trajectory CSV. The sample period is taken from the first two
    /// timestamps, so at least two rows are required.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        if header.iter().map(str::trim).ne(CSV_HEADER.iter().copied()) {
            return Err(Error::Parse(format!(
                "expected header {}, found {}",
                CSV_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        for (i, record) in r.deserialize::<TrajectoryRow>().enumerate() {
            rows.push(record.map_err(|e| Error::Parse(format!("row {}: {e}", i + 1)))?);
        }
        if rows.len() < 2 {
            return Err(Error::Parse(
                "a trajectory CSV needs at least two rows to define dt".into(),
            ));
        }
        let dt = rows[1].t - rows[0].t;
        Self::new(dt, rows)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}
