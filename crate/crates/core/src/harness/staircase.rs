//! Staircase reports: how close a K-type mixture's FDR comes to Ψ at the
//! thresholds where new types start opting in.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::csv_out::{self, csv_err, fmt_sig};
use super::TauGrid;
use crate::agent::Agent;
use crate::error::{Error, Result};
use crate::mathkit::Interval;
use crate::mixture::{self, mixture_fdr_with, psi};
use crate::model::{self, AgentMixture, Hypothesis, Scenario};

pub const DEFAULT_GRID_POINTS: usize = 1000;

/// Entry of one agent type into the opting-in population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub type_index: usize,
    pub prior_null: f64,
    /// Analytic opt-in threshold.
    pub tau_exact: f64,
    /// Ψ − FDR_K at `tau_exact`; NaN when Ψ is not in its valid range there.
    pub gap_exact: f64,
    /// First grid point at or after `tau_exact`.
    pub tau_grid: Option<f64>,
    pub gap_grid: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaircaseReport {
    pub mixture: AgentMixture,
    pub transitions: Vec<Transition>,
    pub grid: TauGrid,
    /// Largest gap over grid transition points.
    pub max_gap_grid: f64,
    /// Largest gap over analytic transition points.
    pub max_gap_exact: f64,
}

/// Default measurement grid: 1000 points over `[0, min(1, c/R̄1)]`, the range on
/// which the comparison bound τR̄1/c stays informative.
pub fn default_grid(scenario: &Scenario) -> Result<TauGrid> {
    let r1 = model::reward_mean(&scenario.rewards, Hypothesis::Alt)?;
    TauGrid::new(0.0, (scenario.cost / r1).min(1.0), DEFAULT_GRID_POINTS)
}

/// Ratio mixture over `k` priors evenly spaced on `prior_range`, with each new
/// type making up `ratio` of the population up to it.
pub fn staircase_report(
    scenario: &Scenario,
    k: usize,
    prior_range: Interval,
    ratio: f64,
    grid: Option<TauGrid>,
) -> Result<StaircaseReport> {
    if k == 0 {
        return Err(Error::InvalidArgument("need at least one agent type".into()));
    }
    if prior_range.lo() < 0.0 || prior_range.hi() > 1.0 {
        return Err(Error::InvalidArgument("prior range must lie within [0,1]".into()));
    }
    let priors: Vec<f64> = if k == 1 {
        vec![prior_range.lo()]
    } else {
        (0..k).map(|i| prior_range.lo() + prior_range.width() * i as f64 / (k - 1) as f64).collect()
    };
    let m = mixture::mixture_from_ratio(&priors, ratio)?;
    measure(scenario, m, grid)
}

/// Measures the staircase gaps of an arbitrary mixture.
pub fn measure(scenario: &Scenario, mixture: AgentMixture, grid: Option<TauGrid>) -> Result<StaircaseReport> {
    let agent = Agent::new(scenario)?;
    let grid = match grid {
        Some(g) => g,
        None => default_grid(scenario)?,
    };
    let points = grid.points();
    let gap = |tau: f64| -> Result<f64> {
        match psi(&agent, tau) {
            Ok(b) if b.is_valid() => Ok(b.value - mixture_fdr_with(&agent, &mixture, tau)?.fdr),
            _ => Ok(f64::NAN),
        }
    };

    let mut transitions = Vec::new();
    for (i, t) in mixture.types().iter().enumerate() {
        let Some(tau_exact) = agent.optin_threshold(t.prior_null)? else { continue };
        let tau_grid = points.iter().copied().find(|&p| p >= tau_exact);
        let gap_grid = match tau_grid {
            Some(p) => Some(gap(p)?).filter(|g| !g.is_nan()),
            None => None,
        };
        transitions.push(Transition {
            type_index: i,
            prior_null: t.prior_null,
            tau_exact,
            gap_exact: gap(tau_exact)?,
            tau_grid,
            gap_grid,
        });
    }
    let max_gap_grid = transitions.iter().filter_map(|t| t.gap_grid).fold(0.0, f64::max);
    let max_gap_exact = transitions.iter().map(|t| t.gap_exact).filter(|g| !g.is_nan()).fold(0.0, f64::max);
    Ok(StaircaseReport { mixture, transitions, grid, max_gap_grid, max_gap_exact })
}

/// Gaps Ψ(τ_i) − FDR_K(τ_i) of the ε-staircase mixture built for `thresholds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaircaseCheck {
    pub mixture: AgentMixture,
    pub thresholds: Vec<f64>,
    pub gaps: Vec<f64>,
    pub epsilon: f64,
}

impl StaircaseCheck {
    /// Zero gap at the first threshold and at most ε at the others.
    pub fn holds(&self, tol: f64) -> bool {
        self.gaps.first().is_some_and(|g| g.abs() <= tol)
            && self.gaps.iter().all(|&g| (-tol..=self.epsilon + tol).contains(&g))
    }
}

pub fn staircase_check(scenario: &Scenario, thresholds: &[f64], epsilon: f64) -> Result<StaircaseCheck> {
    let agent = Agent::new(scenario)?;
    let m = mixture::staircase_mixture_with(&agent, thresholds, epsilon)?;
    let gaps = thresholds
        .iter()
        .map(|&t| Ok(psi(&agent, t)?.value - mixture_fdr_with(&agent, &m, t)?.fdr))
        .collect::<Result<_>>()?;
    Ok(StaircaseCheck { mixture: m, thresholds: thresholds.to_vec(), gaps, epsilon })
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_sig).unwrap_or_default()
}

pub fn write_csv<W: Write>(report: &StaircaseReport, out: W) -> Result<()> {
    let mut w = csv_out::writer(out);
    w.write_record(["type_index", "prior_null", "weight", "tau_exact", "gap_exact", "tau_grid", "gap_grid"])
        .map_err(csv_err)?;
    for t in &report.transitions {
        w.write_record([
            t.type_index.to_string(),
            fmt_sig(t.prior_null),
            fmt_sig(report.mixture.types()[t.type_index].weight),
            fmt_sig(t.tau_exact),
            fmt_sig(t.gap_exact),
            opt(t.tau_grid),
            opt(t.gap_grid),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Config(format!("csv output: {e}")))?;
    Ok(())
}
