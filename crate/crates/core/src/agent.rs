//! Agent-side calculus: utility differences, expected opt-in utility and the
//! opt-in decision.
//!
//! The expected utility of opting in is linear in the prior null probability π0:
//!
//! ```text
//! ℓ(π0) = π0 (β̄0 Δ0 − β̄1 Δ1) + u(W0 − c) + β̄1 Δ1
//! ```
//!
//! and the agent opts in iff `ℓ(π0) ≥ u(W0)`. Decisions are evaluated through the
//! margin `ℓ(π0) − u(W0) = π0 (β̄0 Δ0 − β̄1 Δ1) + β̄1 Δ1 − L`, which avoids
//! subtracting two large utilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathkit::{self, Interval};
use crate::model::{self, Hypothesis, Scenario, UtilityModel};

/// Relative slack under which a negative opt-in margin still counts as a tie.
///
/// Worst-case agents sit exactly on the decision boundary; the slack keeps them
/// opting in despite rounding in the margin.
pub const TIE_RTOL: f64 = 1e-12;

const THRESHOLD_TOL: f64 = 1e-13;

/// Δ0, Δ1 and L in utils.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityDeltas {
    /// E[u(W0 + R − c) | null] − u(W0 − c)
    pub delta0: f64,
    /// E[u(W0 + R − c) | alt] − u(W0 − c)
    pub delta1: f64,
    /// u(W0) − u(W0 − c)
    pub loss: f64,
}

impl UtilityDeltas {
    pub fn new(delta0: f64, delta1: f64, loss: f64) -> Self {
        Self { delta0, delta1, loss }
    }

    /// Linear utility with constant rewards.
    pub fn risk_neutral(reward0: f64, reward1: f64, cost: f64) -> Self {
        Self::new(reward0, reward1, cost)
    }
}

fn check_domain(scenario: &Scenario) -> Result<()> {
    let s = scenario;
    let u = &s.utility;
    let lose = s.wealth0 - s.cost;
    let min_reward = s.rewards.null.min_value().min(s.rewards.alt.min_value());
    for w in [s.wealth0, lose, lose + min_reward] {
        if !u.in_domain(w) {
            return Err(Error::Domain(format!("utility {u:?} undefined at reachable wealth {w}")));
        }
    }
    Ok(())
}

/// Exact Δ0, Δ1 and L; expectations under truncated-normal rewards use quadrature.
pub fn utility_deltas(scenario: &Scenario) -> Result<UtilityDeltas> {
    check_domain(scenario)?;
    let s = scenario;
    let lose = s.wealth0 - s.cost;
    let gain = |h: Hypothesis| s.rewards.dist(h).expect(|r| s.utility.difference(lose + r, lose));
    Ok(UtilityDeltas {
        delta0: gain(Hypothesis::Null)?,
        delta1: gain(Hypothesis::Alt)?,
        loss: s.utility.difference(s.wealth0, lose),
    })
}

/// Δ̄_j = u(W0 + R̄_j − c) − u(W0 − c) built from the mean rewards, as consumed by
/// the conservative bound.
pub fn utility_deltas_bar(scenario: &Scenario) -> Result<UtilityDeltas> {
    let s = scenario;
    let r0 = model::reward_mean(&s.rewards, Hypothesis::Null)?;
    let r1 = model::reward_mean(&s.rewards, Hypothesis::Alt)?;
    utility_deltas_from_means(scenario, r0, r1)
}

/// Δ̄ for caller-supplied supremum reward means.
pub fn utility_deltas_from_means(scenario: &Scenario, reward0: f64, reward1: f64) -> Result<UtilityDeltas> {
    let s = scenario;
    deltas_from_means(&s.utility, s.wealth0, s.cost, reward0, reward1)
}

/// Δ̄0, Δ̄1 and L from wealth, cost and reward means alone.
pub fn deltas_from_means(
    utility: &UtilityModel,
    wealth0: f64,
    cost: f64,
    reward0: f64,
    reward1: f64,
) -> Result<UtilityDeltas> {
    let lose = wealth0 - cost;
    for w in [wealth0, lose, lose + reward0, lose + reward1] {
        if !utility.in_domain(w) {
            return Err(Error::Domain(format!("utility {utility:?} undefined at wealth {w}")));
        }
    }
    Ok(UtilityDeltas {
        delta0: utility.difference(lose + reward0, lose),
        delta1: utility.difference(lose + reward1, lose),
        loss: utility.difference(wealth0, lose),
    })
}

/// Scenario with its utility differences precomputed.
#[derive(Debug, Clone)]
pub struct Agent<'a> {
    scenario: &'a Scenario,
    deltas: UtilityDeltas,
}

impl<'a> Agent<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self> {
        let deltas = utility_deltas(scenario)?;
        Ok(Self { scenario, deltas })
    }

    pub fn scenario(&self) -> &'a Scenario {
        self.scenario
    }

    pub fn deltas(&self) -> UtilityDeltas {
        self.deltas
    }

    pub fn power(&self, tau: f64) -> Result<(f64, f64)> {
        model::power(&self.scenario.test, tau)
    }

    /// `ℓ(π0) − u(W0)` for the given approval probabilities.
    pub fn margin_at(&self, prior_null: f64, beta0: f64, beta1: f64) -> f64 {
        let d = &self.deltas;
        prior_null * (beta0 * d.delta0 - beta1 * d.delta1) + beta1 * d.delta1 - d.loss
    }

    /// Opt-in decision for the given approval probabilities; ties opt in.
    pub fn opts_in_at(&self, prior_null: f64, beta0: f64, beta1: f64) -> bool {
        let d = &self.deltas;
        let scale = (beta1 * d.delta1).abs().max(d.loss.abs()).max(beta0 * d.delta0.abs());
        self.margin_at(prior_null, beta0, beta1) >= -TIE_RTOL * scale
    }

    pub fn expected_optin_utility(&self, prior_null: f64, tau: f64) -> Result<f64> {
        check_probability("prior_null", prior_null)?;
        let (b0, b1) = self.power(tau)?;
        let d = &self.deltas;
        let s = self.scenario;
        let u_lose = s.utility.evaluate(s.wealth0 - s.cost)?;
        Ok(prior_null * (b0 * d.delta0 - b1 * d.delta1) + u_lose + b1 * d.delta1)
    }

    pub fn opts_in(&self, prior_null: f64, tau: f64) -> Result<bool> {
        check_probability("prior_null", prior_null)?;
        let (b0, b1) = self.power(tau)?;
        Ok(self.opts_in_at(prior_null, b0, b1))
    }

    /// Smallest τ at which an agent with this prior opts in, or `None` when even
    /// τ = 1 does not attract it. The margin is non-decreasing in τ, so bisection
    /// on the decision applies.
    pub fn optin_threshold(&self, prior_null: f64) -> Result<Option<f64>> {
        check_probability("prior_null", prior_null)?;
        let decide = |tau: f64| -> Result<bool> {
            let (b0, b1) = self.scenario.test.power_unchecked(tau);
            Ok(self.opts_in_at(prior_null, b0, b1))
        };
        if !decide(1.0)? {
            return Ok(None);
        }
        if decide(0.0)? {
            return Ok(Some(0.0));
        }
        let indicator = |tau: f64| if decide(tau).unwrap_or(false) { 1.0 } else { -1.0 };
        let mid = mathkit::find_root(indicator, Interval::new(0.0, 1.0)?, THRESHOLD_TOL)?;
        // Step to the opting-in side of the returned bracket.
        let mut tau = mid;
        while !decide(tau)? {
            tau = (tau + THRESHOLD_TOL).min(1.0);
        }
        Ok(Some(tau))
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must lie in [0,1], got {p}")))
    }
}

/// ℓ(π0) at threshold τ.
pub fn expected_optin_utility(scenario: &Scenario, prior_null: f64, tau: f64) -> Result<f64> {
    Agent::new(scenario)?.expected_optin_utility(prior_null, tau)
}

pub fn opts_in(scenario: &Scenario, prior_null: f64, tau: f64) -> Result<bool> {
    Agent::new(scenario)?.opts_in(prior_null, tau)
}

pub fn optin_threshold(scenario: &Scenario, prior_null: f64) -> Result<Option<f64>> {
    Agent::new(scenario)?.optin_threshold(prior_null)
}
