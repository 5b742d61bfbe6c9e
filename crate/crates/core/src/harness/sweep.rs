//! Threshold sweeps: the comparison bound, both FDR bounds and the exact
//! mixture FDR at every τ of a grid.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::csv_out::{self, csv_err, fmt_sig};
use crate::agent::{self, Agent, UtilityDeltas};
use crate::bounds::{self, BoundStatus};
use crate::error::Result;
use crate::maximin;
use crate::mixture;
use crate::model::{self, AgentMixture, Hypothesis, Scenario};

/// One sweep row. Bound columns hold clamped values in [0, 1]; a bound that is
/// undefined at this τ is reported as NaN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tau: f64,
    /// τ R̄1 / c.
    pub bates_bound: f64,
    /// Ψ(τ) with the test's actual power.
    pub bound_known: f64,
    /// The power-free bound with κ ≡ 1 and mean rewards.
    pub bound_conservative: f64,
    pub exact_fdr: f64,
    /// Status of `bound_known`.
    pub status: BoundStatus,
}

pub const HEADER: [&str; 6] = ["tau", "bates_bound", "bound_known", "bound_conservative", "exact_fdr", "status"];

pub fn sweep(scenario: &Scenario, mixture: &AgentMixture, tau_grid: &[f64]) -> Result<Vec<SweepRow>> {
    let agent = Agent::new(scenario)?;
    let d_bar = agent::utility_deltas_bar(scenario)?;
    let r1_bar = model::reward_mean(&scenario.rewards, Hypothesis::Alt)?;
    tau_grid.par_iter().map(|&tau| row(&agent, &d_bar, r1_bar, mixture, tau)).collect()
}

fn row(agent: &Agent<'_>, d_bar: &UtilityDeltas, r1_bar: f64, mixture: &AgentMixture, tau: f64) -> Result<SweepRow> {
    let (b0, b1) = agent.power(tau)?;
    let d = agent.deltas();
    let (bound_known, status) = match bounds::fdr_bound_known(b0, b1, &d) {
        Ok(b) => (b.clamped, b.status),
        // β̄1 = β̄0 at the ends of [0,1]: fall back to the worst-case posterior limit.
        Err(_) if b1 * d.delta1 < d.loss => (0.0, BoundStatus::NoOptInRegion),
        Err(_) => {
            let v = maximin::worst_case_posterior(b0, b1, &d);
            (v, bounds::BoundResult::from_value(v).status)
        }
    };
    let bound_conservative = bounds::fdr_bound_conservative(tau, 1.0, d_bar).map(|b| b.clamped).unwrap_or(f64::NAN);
    Ok(SweepRow {
        tau,
        bates_bound: bounds::bates_bound(tau, r1_bar, agent.scenario().cost).clamped,
        bound_known,
        bound_conservative,
        exact_fdr: mixture::mixture_fdr_with(agent, mixture, tau)?.fdr,
        status,
    })
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv_out::writer(out);
    w.write_record(HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            fmt_sig(r.tau),
            fmt_sig(r.bates_bound),
            fmt_sig(r.bound_known),
            fmt_sig(r.bound_conservative),
            fmt_sig(r.exact_fdr),
            r.status.as_str().to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| crate::Error::Config(format!("csv output: {e}")))?;
    Ok(())
}
