//! Monte-Carlo simulation of the opt-in game.
//!
//! Each round draws an agent type by weight, a hypothesis from the type's prior,
//! applies the analytic opt-in decision, then draws evidence and reward
//! independently given the hypothesis. GaussianMean evidence is
//! `Z ~ N(θ, 1)`, `X = 1 − Φ(Z)`; explicit tests sample X from the approval curve
//! by generalized inversion. The claim is approved iff `X ≤ τ`.
//!
//! The generator is Xoshiro256++ seeded through SplitMix64 (`seed_from_u64`), so
//! a given seed reproduces the same result on every platform.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::agent::Agent;
use crate::error::{Error, Result};
use crate::mathkit;
use crate::model::{AgentMixture, Hypothesis, Scenario, TestModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub n_rounds: u64,
    pub n_optin: u64,
    pub n_approved: u64,
    pub n_false_approved: u64,
    /// `n_false_approved / n_approved`, zero without approvals.
    pub empirical_fdr: f64,
    pub seed: u64,
    /// Opted-in rounds whose claim is null.
    pub n_null_tested: u64,
    pub n_null_approved: u64,
    /// Total reward paid out over approved rounds.
    pub reward_paid: f64,
    /// Counts split by agent type, in mixture order.
    pub per_type: Vec<TypeCounts>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeCounts {
    pub n_rounds: u64,
    pub n_optin: u64,
    pub n_approved: u64,
    pub n_false_approved: u64,
}

impl SimResult {
    pub fn optin_rate(&self) -> f64 {
        ratio(self.n_optin, self.n_rounds)
    }

    /// Fraction of tested nulls that were approved.
    pub fn null_approval_rate(&self) -> f64 {
        ratio(self.n_null_approved, self.n_null_tested)
    }

    /// Per-type false approval fractions averaged with the types' shares of the
    /// opting-in rounds; estimates the type-averaged mixture FDR.
    pub fn type_averaged_fdr(&self) -> f64 {
        self.per_type
            .iter()
            .filter(|t| t.n_approved > 0)
            .map(|t| ratio(t.n_optin, self.n_optin) * ratio(t.n_false_approved, t.n_approved))
            .sum()
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn simulate(scenario: &Scenario, mixture: &AgentMixture, tau: f64, n: u64, seed: u64) -> Result<SimResult> {
    if n == 0 {
        return Err(Error::InvalidArgument("simulation needs at least one round".into()));
    }
    let agent = Agent::new(scenario)?;
    let (b0, b1) = agent.power(tau)?;
    let types = mixture.types();
    let optin: Vec<bool> = types.iter().map(|t| agent.opts_in_at(t.prior_null, b0, b1)).collect();
    let mut cumulative = Vec::with_capacity(types.len());
    let mut acc = 0.0;
    for t in types {
        acc += t.weight;
        cumulative.push(acc);
    }

    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut r = SimResult {
        n_rounds: n,
        n_optin: 0,
        n_approved: 0,
        n_false_approved: 0,
        empirical_fdr: 0.0,
        seed,
        n_null_tested: 0,
        n_null_approved: 0,
        reward_paid: 0.0,
        per_type: vec![TypeCounts::default(); types.len()],
    };

    for _ in 0..n {
        let u: f64 = rng.sample(Open01);
        let k = cumulative.iter().position(|&c| u * acc <= c).unwrap_or(types.len() - 1);
        let is_null = rng.sample::<f64, _>(Open01) < types[k].prior_null;
        let tc = &mut r.per_type[k];
        tc.n_rounds += 1;
        if !optin[k] {
            continue;
        }
        tc.n_optin += 1;
        r.n_optin += 1;
        let h = if is_null { Hypothesis::Null } else { Hypothesis::Alt };
        let x = draw_evidence(&scenario.test, h, rng.sample(Open01));
        let reward_u: f64 = rng.sample(Open01);
        if is_null {
            r.n_null_tested += 1;
        }
        if x <= tau {
            r.n_approved += 1;
            tc.n_approved += 1;
            r.reward_paid += scenario.rewards.dist(h).inverse_cdf(reward_u);
            if is_null {
                tc.n_false_approved += 1;
                r.n_false_approved += 1;
                r.n_null_approved += 1;
            }
        }
    }
    r.empirical_fdr = ratio(r.n_false_approved, r.n_approved);
    Ok(r)
}

/// Evidence X from a uniform draw `u`.
fn draw_evidence(test: &TestModel, h: Hypothesis, u: f64) -> f64 {
    match test {
        TestModel::GaussianMean { theta1 } => {
            let theta = match h {
                Hypothesis::Null => 0.0,
                Hypothesis::Alt => *theta1,
            };
            mathkit::sf(theta + mathkit::quantile(u))
        }
        TestModel::Explicit { beta0, beta1 } => match h {
            Hypothesis::Null => beta0.generalized_inverse(u),
            Hypothesis::Alt => beta1.generalized_inverse(u),
        },
    }
}
