//! Experiment harness: configuration files, Monte-Carlo simulation of the game,
//! threshold sweeps, the FDA table and staircase reports, with CSV output.

pub mod config;
pub mod csv_out;
pub mod fda;
pub mod sim;
pub mod staircase;
pub mod sweep;

pub use config::Config;
pub use fda::{fda_table, FdaConfig, FdaRow, Protocol};
pub use sim::{simulate, SimResult};
pub use staircase::{staircase_check, staircase_report, StaircaseCheck, StaircaseReport, Transition};
pub use sweep::{sweep, SweepRow};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `steps` evenly spaced thresholds from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauGrid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl TauGrid {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(Error::InvalidArgument(format!("tau grid [{lo}, {hi}] must lie within [0,1]")));
        }
        if steps < 2 && lo != hi {
            return Err(Error::InvalidArgument("tau grid needs at least two steps".into()));
        }
        Ok(Self { lo, hi, steps: steps.max(1) })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        let n = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| (self.lo + (self.hi - self.lo) * i as f64 / n).min(self.hi))
            .collect()
    }
}
