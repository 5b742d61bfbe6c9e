//! Analytic upper bounds on the prior null probability of opting-in agents and
//! on the Bayes FDR of the principal's test.
//!
//! Every bound returns its raw value alongside a clamped value and a status so
//! that threshold sweeps can trace curves through the zero crossing and the
//! saturation at one.

use serde::{Deserialize, Serialize};

use crate::agent::UtilityDeltas;
use crate::error::{Error, Result};

const MIN_DENOMINATOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundStatus {
    /// Even the ideal agent (π0 = 0) does not opt in; raw value is negative.
    NoOptInRegion,
    Valid,
    /// Raw value is at least one.
    Vacuous,
}

impl BoundStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::NoOptInRegion => "no_optin",
            Self::Valid => "valid",
            Self::Vacuous => "vacuous",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub value: f64,
    pub clamped: f64,
    pub status: BoundStatus,
}

impl BoundResult {
    pub fn from_value(value: f64) -> Self {
        let status = if value < 0.0 {
            BoundStatus::NoOptInRegion
        } else if value >= 1.0 {
            BoundStatus::Vacuous
        } else {
            BoundStatus::Valid
        };
        Self { value, clamped: value.clamp(0.0, 1.0), status }
    }

    pub fn is_valid(&self) -> bool {
        self.status == BoundStatus::Valid
    }
}

fn check_denominator(den: f64) -> Result<f64> {
    if den > MIN_DENOMINATOR {
        Ok(den)
    } else {
        Err(Error::DegenerateDenominator(den))
    }
}

/// Prior elicitation with known power:
/// `π0 ≤ (β̄1Δ1 − L) / (β̄1Δ1 − β̄0Δ0)`.
pub fn prior_bound_known(beta0: f64, beta1: f64, deltas: &UtilityDeltas) -> Result<BoundResult> {
    if !(beta1 > beta0) {
        return Err(Error::PowerAssumption { beta0, beta1 });
    }
    let d = deltas;
    let num = beta1 * d.delta1 - d.loss;
    let den = check_denominator(beta1 * d.delta1 - beta0 * d.delta0)?;
    Ok(BoundResult::from_value(num / den))
}

/// Prior elicitation through the super-uniformity bound β̄0 ≤ τ and an envelope
/// κ(τ) ≥ β̄1(τ).
pub fn prior_bound_envelope(tau: f64, kappa: f64, deltas: &UtilityDeltas) -> Result<BoundResult> {
    if !(kappa >= tau) || !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::Envelope { tau, kappa });
    }
    let d = deltas;
    let num = kappa * d.delta1 - d.loss;
    let den = check_denominator(kappa * d.delta1 - tau * d.delta0)?;
    Ok(BoundResult::from_value(num / den))
}

/// Sharp Bayes FDR bound with known power, Ψ:
///
/// ```text
/// Ψ = β̄0 (β̄1Δ1 − L) / ((β̄1 − β̄0) L + β̄0 β̄1 (Δ1 − Δ0))
/// ```
///
/// The value reaches one exactly when β̄0 ≥ L/Δ0, where even a certain-null agent
/// opts in.
pub fn fdr_bound_known(beta0: f64, beta1: f64, deltas: &UtilityDeltas) -> Result<BoundResult> {
    if !(beta1 > beta0 && beta0 >= 0.0) {
        return Err(Error::PowerAssumption { beta0, beta1 });
    }
    let d = deltas;
    let num = beta0 * (beta1 * d.delta1 - d.loss);
    let den = check_denominator((beta1 - beta0) * d.loss + beta0 * beta1 * (d.delta1 - d.delta0))?;
    Ok(BoundResult::from_value(num / den))
}

/// Conservative Bayes FDR bound from τ, the envelope κ(τ) and the mean-reward
/// differences Δ̄.
pub fn fdr_bound_conservative(tau: f64, kappa: f64, deltas_bar: &UtilityDeltas) -> Result<BoundResult> {
    if !(kappa >= tau) || !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::Envelope { tau, kappa });
    }
    let d = deltas_bar;
    let num = tau * (kappa * d.delta1 - d.loss);
    let den = check_denominator((kappa - tau) * d.loss + tau * kappa * (d.delta1 - d.delta0))?;
    Ok(BoundResult::from_value(num / den))
}

/// Prior-work comparison bound τR/c.
pub fn bates_bound(tau: f64, reward: f64, cost: f64) -> BoundResult {
    BoundResult::from_value(tau * reward / cost)
}

/// Risk-neutral, constant-reward form of [`fdr_bound_known`]:
/// `(β0 R / c) · (β1 R − c) / ((β1 − β0) R)`.
pub fn risk_neutral_bound_known(beta0: f64, beta1: f64, reward: f64, cost: f64) -> f64 {
    beta0 * reward / cost * (beta1 * reward - cost) / ((beta1 - beta0) * reward)
}

/// Risk-neutral form of [`fdr_bound_conservative`] with κ ≡ 1: `τ (R − c) / ((1 − τ) c)`.
pub fn risk_neutral_bound_unknown(tau: f64, reward: f64, cost: f64) -> f64 {
    tau * (reward - cost) / ((1.0 - tau) * cost)
}
