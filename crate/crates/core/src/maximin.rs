//! Principal's utility and maximin-optimal thresholds.
//!
//! With utility ω1 for approving a non-null, −ω0 for approving a null and zero on
//! denial, the worst case over agent priors at threshold τ is
//! `min(0, (ω0 + ω1)(ω1/(ω0 + ω1) − Ψ̃(τ)))`, so τ is maximin optimal iff
//! `Ψ̃(τ) ≤ ω1/(ω0 + ω1)`. Ψ̃ is not monotone in general, hence the grid scan.

use serde::{Deserialize, Serialize};

use crate::agent::{Agent, UtilityDeltas};
use crate::bounds::{self, BoundStatus};
use crate::error::{Error, Result};
use crate::model::Scenario;

pub const DEFAULT_GRID_POINTS: usize = 10_000;
const BOUNDARY_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrincipalWeights {
    /// Harm of approving a null.
    pub omega0: f64,
    /// Benefit of approving a non-null.
    pub omega1: f64,
}

impl PrincipalWeights {
    pub fn new(omega0: f64, omega1: f64) -> Result<Self> {
        if omega0 > 0.0 && omega1 > 0.0 && omega0.is_finite() && omega1.is_finite() {
            Ok(Self { omega0, omega1 })
        } else {
            Err(Error::InvalidArgument(format!(
                "principal weights must be positive and finite, got ({omega0}, {omega1})"
            )))
        }
    }

    /// Break-even posterior null probability ω1/(ω0 + ω1).
    pub fn target(&self) -> f64 {
        self.omega1 / (self.omega0 + self.omega1)
    }
}

pub fn principal_utility(weights: &PrincipalWeights, posterior_null: f64, opted_in: bool) -> f64 {
    if opted_in {
        (weights.omega0 + weights.omega1) * (weights.target() - posterior_null)
    } else {
        0.0
    }
}

/// Supremum of the posterior null probability over every prior that opts in at
/// the given approval probabilities; zero when nobody opts in.
pub fn worst_case_posterior(beta0: f64, beta1: f64, deltas: &UtilityDeltas) -> f64 {
    let d = deltas;
    if beta1 * d.delta1 < d.loss || beta1 <= 0.0 {
        return 0.0;
    }
    match bounds::fdr_bound_known(beta0, beta1, d) {
        Ok(b) => match b.status {
            BoundStatus::NoOptInRegion => 0.0,
            _ => b.clamped,
        },
        // No power (β̄1 ≤ β̄0) or a degenerate denominator: agents cannot be
        // told apart by the test, and some prior arbitrarily close to one opts in.
        Err(_) => 1.0,
    }
}

/// Worst-case principal utility at τ.
pub fn worst_case_utility(agent: &Agent<'_>, weights: &PrincipalWeights, tau: f64) -> Result<f64> {
    let (b0, b1) = agent.power(tau)?;
    let sup = worst_case_posterior(b0, b1, &agent.deltas());
    Ok(((weights.omega0 + weights.omega1) * (weights.target() - sup)).min(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximinRegion {
    pub target: f64,
    /// Largest maximin-optimal threshold, refined by bisection at the boundary.
    pub tau_max: f64,
    /// Grid thresholds that are maximin optimal.
    pub region: Vec<f64>,
    pub grid_points: usize,
}

impl MaximinRegion {
    /// Whether the grid point nearest `tau` is maximin optimal.
    pub fn contains_grid_point(&self, tau: f64) -> bool {
        let half_step = 0.5 / (self.grid_points - 1) as f64;
        self.region.iter().any(|&t| (t - tau).abs() < half_step)
    }
}

/// Scans `grid_points` evenly spaced thresholds over [0, 1].
pub fn maximin_region(scenario: &Scenario, weights: &PrincipalWeights, grid_points: usize) -> Result<MaximinRegion> {
    let agent = Agent::new(scenario)?;
    maximin_region_with(&agent, weights, grid_points)
}

pub fn maximin_region_with(agent: &Agent<'_>, weights: &PrincipalWeights, grid_points: usize) -> Result<MaximinRegion> {
    if grid_points < 2 {
        return Err(Error::InvalidArgument("maximin grid needs at least two points".into()));
    }
    let target = weights.target();
    let d = agent.deltas();
    let optimal = |tau: f64| -> bool {
        let (b0, b1) = agent.scenario().test.power_unchecked(tau);
        worst_case_posterior(b0, b1, &d) <= target
    };

    let step = 1.0 / (grid_points - 1) as f64;
    let grid: Vec<f64> = (0..grid_points).map(|i| (i as f64 * step).min(1.0)).collect();
    let flags: Vec<bool> = grid.iter().map(|&t| optimal(t)).collect();
    let region: Vec<f64> = grid.iter().zip(&flags).filter(|(_, &f)| f).map(|(&t, _)| t).collect();

    // τ = 0 approves nothing, so the region is never empty.
    let last = flags.iter().rposition(|&f| f).unwrap_or(0);
    let tau_max = if last + 1 == grid.len() {
        1.0
    } else {
        let (mut lo, mut hi) = (grid[last], grid[last + 1]);
        while hi - lo > BOUNDARY_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if optimal(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };

    Ok(MaximinRegion { target, tau_max, region, grid_points })
}
