//! Trot-gait rewards for a hexapod.
//!
//! The two tripods `{FL, MR, RL}` and `{FR, ML, RR}` are the contact groups of
//! an alternating-tripod trot. `r_trot` pays 1 when exactly one group (and no
//! other leg) is on the ground; `r_unsync` measures how unevenly the groups
//! have carried the robot over a window of frames.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_UNSYNC_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Leg {
    FL,
    FR,
    ML,
    MR,
    RL,
    RR,
}

impl Leg {
    pub const ALL: [Leg; 6] = [Leg::FL, Leg::FR, Leg::ML, Leg::MR, Leg::RL, Leg::RR];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["FL", "FR", "ML", "MR", "RL", "RR"][self.index()]
    }
}

/// Ground-contact state of the six legs, in the fixed order FL, FR, ML, MR, RL, RR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ContactFrame(pub [bool; 6]);

impl ContactFrame {
    pub fn from_legs(legs: &[Leg]) -> Self {
        let mut c = [false; 6];
        for leg in legs {
            c[leg.index()] = true;
        }
        Self(c)
    }

    /// Frame whose bit `i` (LSB first) is the contact of `Leg::ALL[i]`.
    pub fn from_bits(bits: u8) -> Self {
        Self(std::array::from_fn(|i| bits >> i & 1 == 1))
    }

    pub fn bits(&self) -> u8 {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &c)| acc | (c as u8) << i)
    }

    pub fn in_contact(&self, leg: Leg) -> bool {
        self.0[leg.index()]
    }

    fn count_in(&self, group: &[Leg; 3]) -> u32 {
        group.iter().filter(|&&l| self.in_contact(l)).count() as u32
    }
}

/// The two trot tripods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContactGroups {
    pub group0: [Leg; 3],
    pub group1: [Leg; 3],
}

impl Default for ContactGroups {
    fn default() -> Self {
        Self::TROT
    }
}

impl ContactGroups {
    pub const TROT: Self = Self {
        group0: [Leg::FL, Leg::MR, Leg::RL],
        group1: [Leg::FR, Leg::ML, Leg::RR],
    };

    pub fn swapped(&self) -> Self {
        Self {
            group0: self.group1,
            group1: self.group0,
        }
    }

    pub fn frame0(&self) -> ContactFrame {
        ContactFrame::from_legs(&self.group0)
    }

    pub fn frame1(&self) -> ContactFrame {
        ContactFrame::from_legs(&self.group1)
    }

    /// Groups must be disjoint and cover all six legs.
    pub fn is_partition(&self) -> bool {
        let a = self.frame0().bits();
        let b = self.frame1().bits();
        a & b == 0 && a | b == 0b11_1111
    }

    pub fn r_trot(&self, frame: &ContactFrame) -> u32 {
        let is0 = *frame == self.frame0();
        let is1 = *frame == self.frame1();
        (is0 ^ is1) as u32
    }

    pub fn r_unsync(&self, history: &[ContactFrame], window: usize) -> Result<u32> {
        if history.len() < window {
            return Err(Error::invalid(format!(
                "history has {} frames, window needs {window}",
                history.len()
            )));
        }
        let recent = &history[history.len() - window..];
        let n0: u32 = recent.iter().map(|f| f.count_in(&self.group0)).sum();
        let n1: u32 = recent.iter().map(|f| f.count_in(&self.group1)).sum();
        Ok(n0.abs_diff(n1))
    }
}

/// 1 when the legs in contact are exactly one trot tripod, else 0.
pub fn r_trot(frame: &ContactFrame) -> u32 {
    ContactGroups::TROT.r_trot(frame)
}

/// `|Σ|G0 ∩ C_t| − Σ|G1 ∩ C_t||` over the last `window` frames.
pub fn r_unsync(history: &[ContactFrame], window: usize) -> Result<u32> {
    ContactGroups::TROT.r_unsync(history, window)
}

/// A contact log: `t,FL,FR,ML,MR,RL,RR` with 0/1 entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactLog {
    pub times: Vec<f64>,
    pub frames: Vec<ContactFrame>,
}

const LOG_HEADER: [&str; 7] = ["t", "FL", "FR", "ML", "MR", "RL", "RR"];

impl ContactLog {
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        if header.iter().map(str::trim).ne(LOG_HEADER) {
            return Err(Error::Parse(format!(
                "contact log header must be {}",
                LOG_HEADER.join(",")
            )));
        }
        let mut times = Vec::new();
        let mut frames = Vec::new();
        for (line, record) in r.records().enumerate() {
            let record = record?;
            let t: f64 = record[0].trim().parse().map_err(|_| {
                Error::Parse(format!("row {}: bad time {:?}", line + 1, &record[0]))
            })?;
            if !t.is_finite() {
                return Err(Error::Parse(format!("row {}: non-finite time", line + 1)));
            }
            let mut c = [false; 6];
            for (k, slot) in c.iter_mut().enumerate() {
                *slot = match record[k + 1].trim() {
                    "0" => false,
                    "1" => true,
                    other => {
                        return Err(Error::Parse(format!(
                            "row {}: contact {} must be 0 or 1, got {other:?}",
                            line + 1,
                            LOG_HEADER[k + 1]
                        )))
                    }
                };
            }
            times.push(t);
            frames.push(ContactFrame(c));
        }
        Ok(Self { times, frames })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = LOG_HEADER.join(",");
        out.push('\n');
        for (t, f) in self.times.iter().zip(&self.frames) {
            out.push_str(&t.to_string());
            for c in f.0 {
                out.push_str(if c { ",1" } else { ",0" });
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardRow {
    pub t: f64,
    pub r_trot: u32,
    /// `None` until `window` frames are available.
    pub r_unsync: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardSeries {
    #[serde(rename = "H")]
    pub window: usize,
    pub rows: Vec<RewardRow>,
}

pub fn reward_series(log: &ContactLog, window: usize) -> Result<RewardSeries> {
    if window == 0 {
        return Err(Error::invalid("window H must be >= 1"));
    }
    let rows = log
        .frames
        .iter()
        .enumerate()
        .map(|(i, frame)| RewardRow {
            t: log.times[i],
            r_trot: r_trot(frame),
            r_unsync: (i + 1 >= window)
                .then(|| r_unsync(&log.frames[..=i], window).expect("window length checked")),
        })
        .collect();
    Ok(RewardSeries { window, rows })
}
