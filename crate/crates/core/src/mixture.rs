//! Exact Bayes FDR for single agent types and K-mixtures, plus the mixture
//! constructions that make the known-power bound tight at chosen thresholds.

use serde::{Deserialize, Serialize};

use crate::agent::Agent;
use crate::bounds;
use crate::error::{Error, Result};
use crate::model::{AgentMixture, Scenario};

/// Bayes FDR of the population at one threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureFdrTrace {
    pub tau: f64,
    /// Zero when nobody opts in.
    pub fdr: f64,
    pub optin_mass: f64,
    pub optin_types: Vec<usize>,
    /// P(null | approved) over the whole opting-in population. Types enter in
    /// proportion to their approval probability, so this differs from `fdr`
    /// once two types with different priors opt in.
    pub pooled_fdr: f64,
}

/// φ(π0) = π0 β̄0 / (π0 β̄0 + (1 − π0) β̄1), the posterior null probability given approval.
pub fn exact_fdr_single(prior_null: f64, beta0: f64, beta1: f64) -> Result<f64> {
    let den = prior_null * beta0 + (1.0 - prior_null) * beta1;
    if !(den > 0.0) {
        return Err(Error::UndefinedPosterior { prior_null });
    }
    Ok((prior_null * beta0 / den).clamp(0.0, 1.0))
}

/// Weighted average of per-type FDRs over the opting-in types.
pub fn mixture_fdr_with(agent: &Agent<'_>, mixture: &AgentMixture, tau: f64) -> Result<MixtureFdrTrace> {
    let (b0, b1) = agent.power(tau)?;
    let mut optin_types = Vec::new();
    let mut mass = 0.0;
    let mut weighted = 0.0;
    let (mut null_approved, mut approved) = (0.0, 0.0);
    for (i, t) in mixture.types().iter().enumerate() {
        if t.weight > 0.0 && agent.opts_in_at(t.prior_null, b0, b1) {
            optin_types.push(i);
            mass += t.weight;
            null_approved += t.weight * t.prior_null * b0;
            approved += t.weight * (t.prior_null * b0 + (1.0 - t.prior_null) * b1);
            // No approvals at all (τ = 0) leaves φ undefined; such types contribute zero.
            let phi = exact_fdr_single(t.prior_null, b0, b1).unwrap_or(0.0);
            weighted += t.weight * phi;
        }
    }
    let fdr = if mass > 0.0 { (weighted / mass).clamp(0.0, 1.0) } else { 0.0 };
    let pooled_fdr = if approved > 0.0 { (null_approved / approved).clamp(0.0, 1.0) } else { 0.0 };
    Ok(MixtureFdrTrace { tau, fdr, optin_mass: mass, optin_types, pooled_fdr })
}

pub fn mixture_fdr(scenario: &Scenario, mixture: &AgentMixture, tau: f64) -> Result<MixtureFdrTrace> {
    mixture_fdr_with(&Agent::new(scenario)?, mixture, tau)
}

/// Largest prior null probability still consistent with opting in at `tau`.
pub fn worstcase_prior_with(agent: &Agent<'_>, tau: f64) -> Result<f64> {
    let (b0, b1) = agent.power(tau)?;
    let d = agent.deltas();
    if !(b0 > 0.0 && b0 * d.delta0 < d.loss) {
        return Err(Error::Region { tau });
    }
    let bound = bounds::prior_bound_known(b0, b1, &d).map_err(|_| Error::Region { tau })?;
    // Slightly negative values belong to a π0 = 0 agent sitting on its tie.
    if (bound.value < 0.0 && !agent.opts_in_at(0.0, b0, b1)) || bound.value >= 1.0 {
        return Err(Error::Region { tau });
    }
    Ok(bound.value.max(0.0))
}

pub fn worstcase_prior(scenario: &Scenario, tau: f64) -> Result<f64> {
    worstcase_prior_with(&Agent::new(scenario)?, tau)
}

/// Ψ(τ) for the agent's scenario.
pub fn psi(agent: &Agent<'_>, tau: f64) -> Result<bounds::BoundResult> {
    let (b0, b1) = agent.power(tau)?;
    bounds::fdr_bound_known(b0, b1, &agent.deltas())
}

/// Mixture whose FDR equals Ψ at `thresholds[0]` and is within `epsilon` of Ψ at
/// every later threshold.
///
/// Type i carries the worst-case prior at τ_i. Unnormalized weights are
/// `w_1 = 1`, `w_i = (Σ_{j<i} w_j) (Ψ(τ_i) − ε) / ε`, so that type i makes up a
/// share `1 − ε/Ψ(τ_i)` of the population opting in at τ_i.
pub fn staircase_mixture(scenario: &Scenario, thresholds: &[f64], epsilon: f64) -> Result<AgentMixture> {
    let agent = Agent::new(scenario)?;
    staircase_mixture_with(&agent, thresholds, epsilon)
}

pub fn staircase_mixture_with(agent: &Agent<'_>, thresholds: &[f64], epsilon: f64) -> Result<AgentMixture> {
    if thresholds.is_empty() {
        return Err(Error::InvalidArgument("at least one threshold is required".into()));
    }
    if thresholds.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("thresholds must be strictly increasing".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let mut priors = Vec::with_capacity(thresholds.len());
    let mut psis = Vec::with_capacity(thresholds.len());
    for &tau in thresholds {
        priors.push(worstcase_prior_with(agent, tau)?);
        psis.push(psi(agent, tau)?.value);
    }
    if let Some((index, &psi)) = psis.iter().enumerate().find(|(_, &p)| epsilon >= p) {
        return Err(Error::InfeasibleEpsilon { epsilon, index, psi });
    }
    let weights = staircase_weights(&psis, epsilon);
    AgentMixture::from_unnormalized(&priors, &weights)
}

/// Unnormalized staircase weights from Ψ(τ_1..K) and ε.
pub fn staircase_weights(psis: &[f64], epsilon: f64) -> Vec<f64> {
    let mut weights = Vec::with_capacity(psis.len());
    let mut running = 0.0;
    for (i, &psi) in psis.iter().enumerate() {
        let w = if i == 0 { 1.0 } else { running * (psi - epsilon) / epsilon };
        running += w;
        weights.push(w);
    }
    weights
}

/// Mixture over increasing `priors` in which each new type makes up the fraction
/// `ratio` of the types up to and including it: `w_j / Σ_{i≤j} w_i = ratio`.
pub fn mixture_from_ratio(priors: &[f64], ratio: f64) -> Result<AgentMixture> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!("ratio must lie in (0,1), got {ratio}")));
    }
    if priors.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("priors must be strictly increasing".into()));
    }
    let weights = ratio_weights(priors.len(), ratio);
    AgentMixture::from_unnormalized(priors, &weights)
}

/// Unnormalized ratio weights: `w_1 = 1`, `w_j = ratio · Σ_{i<j} w_i / (1 − ratio)`.
pub fn ratio_weights(k: usize, ratio: f64) -> Vec<f64> {
    let mut weights = Vec::with_capacity(k);
    let mut running = 0.0;
    for i in 0..k {
        let w = if i == 0 { 1.0 } else { ratio * running / (1.0 - ratio) };
        running += w;
        weights.push(w);
    }
    weights
}
