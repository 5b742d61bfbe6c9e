//! Domain types: utilities, reward distributions, power functions, scenarios and
//! agent mixtures.
//!
//! All money quantities are plain reals in one caller-chosen unit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathkit::{self, Interval};

/// Concave, non-decreasing map from wealth to utils.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UtilityModel {
    Linear,
    /// `w^(1-γ)/(1-γ)` for `γ < 1`; requires positive wealth.
    Crra { gamma: f64 },
    /// The `γ = 1` member of the CRRA family.
    Log,
}

impl UtilityModel {
    /// CRRA utility with risk parameter `gamma`. `gamma == 1` maps to [`UtilityModel::Log`].
    pub fn crra(gamma: f64) -> Result<Self> {
        if gamma == 1.0 {
            Ok(Self::Log)
        } else if gamma.is_finite() && gamma < 1.0 {
            Ok(Self::Crra { gamma })
        } else {
            Err(Error::ModelInvariant(format!("CRRA requires gamma < 1, got {gamma}")))
        }
    }

    /// `true` for the utilities defined only on positive wealth.
    pub fn requires_positive_wealth(&self) -> bool {
        !matches!(self, Self::Linear)
    }

    pub fn in_domain(&self, wealth: f64) -> bool {
        wealth.is_finite() && (!self.requires_positive_wealth() || wealth > 0.0)
    }

    pub fn evaluate(&self, wealth: f64) -> Result<f64> {
        if !self.in_domain(wealth) {
            return Err(Error::Domain(format!("{self:?} is undefined at wealth {wealth}")));
        }
        Ok(self.eval_unchecked(wealth))
    }

    pub(crate) fn eval_unchecked(&self, wealth: f64) -> f64 {
        match *self {
            Self::Linear => wealth,
            Self::Crra { gamma } => {
                let k = 1.0 - gamma;
                wealth.powf(k) / k
            }
            Self::Log => wealth.ln(),
        }
    }

    /// `u(high) − u(low)`, computed without forming the two large utilities when
    /// the wealths are close.
    pub(crate) fn difference(&self, high: f64, low: f64) -> f64 {
        match *self {
            Self::Linear => high - low,
            Self::Crra { gamma } => {
                let k = 1.0 - gamma;
                // low^k · ((high/low)^k − 1) / k
                low.powf(k) * (k * (high / low).ln()).exp_m1() / k
            }
            Self::Log => (high / low).ln(),
        }
    }
}

/// Reward paid to the agent on approval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RewardDist {
    Constant { value: f64 },
    TruncNormal { mu: f64, sigma: f64, support: Interval },
}

impl RewardDist {
    pub fn constant(value: f64) -> Self {
        Self::Constant { value }
    }

    pub fn trunc_normal(mu: f64, sigma: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite() && mu.is_finite()) {
            return Err(Error::ModelInvariant(format!(
                "truncated normal needs finite mu and sigma > 0, got ({mu}, {sigma})"
            )));
        }
        Ok(Self::TruncNormal { mu, sigma, support: Interval::new(lo, hi)? })
    }

    pub fn mean(&self) -> Result<f64> {
        match *self {
            Self::Constant { value } => Ok(value),
            Self::TruncNormal { mu, sigma, support } => {
                mathkit::truncnorm_expect(|r| r, mu, sigma, support)
            }
        }
    }

    /// E[g(R)].
    pub fn expect<F: Fn(f64) -> f64>(&self, g: F) -> Result<f64> {
        match *self {
            Self::Constant { value } => Ok(g(value)),
            Self::TruncNormal { mu, sigma, support } => mathkit::truncnorm_expect(g, mu, sigma, support),
        }
    }

    /// Smallest reachable reward.
    pub fn min_value(&self) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::TruncNormal { support, .. } => support.lo(),
        }
    }

    pub fn max_value(&self) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::TruncNormal { support, .. } => support.hi(),
        }
    }

    /// P(R ≥ r).
    pub fn survival(&self, r: f64) -> f64 {
        match *self {
            Self::Constant { value } => {
                if value >= r {
                    1.0
                } else {
                    0.0
                }
            }
            Self::TruncNormal { mu, sigma, support } => {
                if r <= support.lo() {
                    return 1.0;
                }
                if r > support.hi() {
                    return 0.0;
                }
                let alpha = (support.lo() - mu) / sigma;
                let beta = (support.hi() - mu) / sigma;
                let z = (r - mu) / sigma;
                let mass = mathkit::normal_mass(alpha, beta);
                (mathkit::normal_mass(z, beta) / mass).clamp(0.0, 1.0)
            }
        }
    }

    /// Inverse CDF, used for sampling.
    pub(crate) fn inverse_cdf(&self, u: f64) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::TruncNormal { mu, sigma, support } => {
                let a = mathkit::cdf((support.lo() - mu) / sigma);
                let b = mathkit::cdf((support.hi() - mu) / sigma);
                let p = (a + u * (b - a)).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
                (mu + sigma * mathkit::quantile(p)).clamp(support.lo(), support.hi())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    Null,
    Alt,
}

/// Reward distributions conditional on the null and on the alternative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardModel {
    pub null: RewardDist,
    pub alt: RewardDist,
}

impl RewardModel {
    pub fn new(null: RewardDist, alt: RewardDist) -> Self {
        Self { null, alt }
    }

    pub fn constant(null: f64, alt: f64) -> Self {
        Self::new(RewardDist::constant(null), RewardDist::constant(alt))
    }

    pub fn dist(&self, hypothesis: Hypothesis) -> &RewardDist {
        match hypothesis {
            Hypothesis::Null => &self.null,
            Hypothesis::Alt => &self.alt,
        }
    }
}

/// Mean reward R̄_j under the given hypothesis.
pub fn reward_mean(rewards: &RewardModel, hypothesis: Hypothesis) -> Result<f64> {
    rewards.dist(hypothesis).mean()
}

/// Approval probability as a piecewise-linear function of the threshold.
///
/// Knots are `(tau, beta)` pairs sorted by `tau`; values outside the knot range
/// are held constant at the end values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct PowerCurve {
    knots: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(f64, f64)>> for PowerCurve {
    type Error = Error;

    fn try_from(knots: Vec<(f64, f64)>) -> Result<Self> {
        PowerCurve::new(knots)
    }
}

impl From<PowerCurve> for Vec<(f64, f64)> {
    fn from(c: PowerCurve) -> Self {
        c.knots
    }
}

impl PowerCurve {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::ModelInvariant("power curve needs at least one knot".into()));
        }
        for w in knots.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(Error::ModelInvariant("power curve knots must have increasing tau".into()));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::ModelInvariant("power curve must be non-decreasing".into()));
            }
        }
        if knots.iter().any(|&(t, b)| !(0.0..=1.0).contains(&t) || !(0.0..=1.0).contains(&b)) {
            return Err(Error::ModelInvariant("power curve knots must lie in [0,1]²".into()));
        }
        Ok(Self { knots })
    }

    /// Tabulates `f` on `grid`.
    pub fn from_fn<F: Fn(f64) -> f64>(f: F, grid: &[f64]) -> Result<Self> {
        Self::new(grid.iter().map(|&t| (t, f(t))).collect())
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, tau: f64) -> f64 {
        let k = &self.knots;
        if tau <= k[0].0 {
            return k[0].1;
        }
        if tau >= k[k.len() - 1].0 {
            return k[k.len() - 1].1;
        }
        let i = k.partition_point(|&(t, _)| t <= tau);
        let (t0, b0) = k[i - 1];
        let (t1, b1) = k[i];
        b0 + (b1 - b0) * (tau - t0) / (t1 - t0)
    }

    /// Smallest `tau` with `eval(tau) >= u`, the inverse-transform sampler for X.
    pub(crate) fn generalized_inverse(&self, u: f64) -> f64 {
        let k = &self.knots;
        if u <= k[0].1 {
            return k[0].0;
        }
        for w in k.windows(2) {
            let ((t0, b0), (t1, b1)) = (w[0], w[1]);
            if u <= b1 {
                if b1 == b0 {
                    return t0;
                }
                return t0 + (t1 - t0) * (u - b0) / (b1 - b0);
            }
        }
        // Approval curve never reaches u: X lands above every threshold.
        f64::INFINITY
    }
}

/// Approval probabilities as functions of the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestModel {
    /// Simple null θ = 0 versus θ = θ1 with Z ~ N(θ, 1) and p-value X = 1 − Φ(Z).
    GaussianMean { theta1: f64 },
    /// Caller-supplied (averaged or supremum) approval probabilities.
    Explicit { beta0: PowerCurve, beta1: PowerCurve },
}

impl TestModel {
    pub fn gaussian_mean(theta1: f64) -> Result<Self> {
        if theta1 > 0.0 && theta1.is_finite() {
            Ok(Self::GaussianMean { theta1 })
        } else {
            Err(Error::ModelInvariant(format!("theta1 must be positive, got {theta1}")))
        }
    }

    /// `(β̄0(τ), β̄1(τ))` without invariant checks.
    pub(crate) fn power_unchecked(&self, tau: f64) -> (f64, f64) {
        match self {
            Self::GaussianMean { theta1 } => (tau, gaussian_power(*theta1, tau)),
            Self::Explicit { beta0, beta1 } => (beta0.eval(tau), beta1.eval(tau)),
        }
    }
}

/// 1 − Φ(Φ⁻¹(1 − τ) − θ1), evaluated as Φ(Φ⁻¹(τ) + θ1).
pub fn gaussian_power(theta1: f64, tau: f64) -> f64 {
    if tau <= 0.0 {
        0.0
    } else if tau >= 1.0 {
        1.0
    } else {
        mathkit::cdf(mathkit::quantile(tau) + theta1)
    }
}

/// `(β̄0(τ), β̄1(τ))`.
///
/// Explicit curves are checked for super-uniformity and non-trivial power at the
/// queried threshold.
pub fn power(test: &TestModel, tau: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Domain(format!("tau must lie in [0,1], got {tau}")));
    }
    let (b0, b1) = test.power_unchecked(tau);
    if let TestModel::Explicit { .. } = test {
        if b0 > tau + 1e-12 {
            return Err(Error::ModelInvariant(format!(
                "super-uniformity fails: beta0({tau}) = {b0} > tau"
            )));
        }
        if tau > 0.0 && tau < 1.0 && b1 <= b0 {
            return Err(Error::ModelInvariant(format!(
                "non-trivial power fails: beta1({tau}) = {b1} <= beta0 = {b0}"
            )));
        }
    }
    Ok((b0, b1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub wealth0: f64,
    pub cost: f64,
    pub utility: UtilityModel,
    pub rewards: RewardModel,
    pub test: TestModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentType {
    pub prior_null: f64,
    pub weight: f64,
}

/// Population of agent types differing only in their prior null probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMixture", into = "RawMixture")]
pub struct AgentMixture {
    types: Vec<AgentType>,
}

#[derive(Serialize, Deserialize)]
struct RawMixture {
    types: Vec<AgentType>,
}

impl TryFrom<RawMixture> for AgentMixture {
    type Error = Error;

    fn try_from(raw: RawMixture) -> Result<Self> {
        AgentMixture::new(raw.types)
    }
}

impl From<AgentMixture> for RawMixture {
    fn from(m: AgentMixture) -> Self {
        RawMixture { types: m.types }
    }
}

impl AgentMixture {
    pub fn new(types: Vec<AgentType>) -> Result<Self> {
        if types.is_empty() {
            return Err(Error::Mixture("at least one agent type is required".into()));
        }
        for t in &types {
            if !(0.0..=1.0).contains(&t.prior_null) {
                return Err(Error::Mixture(format!("prior_null {} outside [0,1]", t.prior_null)));
            }
            if !(t.weight >= 0.0 && t.weight.is_finite()) {
                return Err(Error::Mixture(format!("weight {} must be non-negative", t.weight)));
            }
        }
        let total: f64 = types.iter().map(|t| t.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Mixture(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { types })
    }

    /// Builds a mixture from unnormalized weights with a single final normalization.
    pub fn from_unnormalized(priors: &[f64], weights: &[f64]) -> Result<Self> {
        if priors.len() != weights.len() {
            return Err(Error::Mixture("priors and weights differ in length".into()));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Mixture(format!("weight total {total} must be positive and finite")));
        }
        Self::new(
            priors
                .iter()
                .zip(weights)
                .map(|(&prior_null, &w)| AgentType { prior_null, weight: w / total })
                .collect(),
        )
    }

    pub fn single(prior_null: f64) -> Result<Self> {
        Self::new(vec![AgentType { prior_null, weight: 1.0 }])
    }

    pub fn types(&self) -> &[AgentType] {
        &self.types
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }
}

/// One named assumption check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

pub const CHECK_WEALTH_DOMAIN: &str = "wealth_domain";
pub const CHECK_NON_DOMINATING_COST: &str = "non_dominating_cost";
pub const CHECK_STOCHASTIC_MONOTONICITY: &str = "stochastic_monotonicity";
pub const CHECK_SUPER_UNIFORMITY: &str = "super_uniformity";
pub const CHECK_NON_TRIVIAL_POWER: &str = "non_trivial_power";

const TAU_CHECK_POINTS: usize = 101;
const SURVIVAL_CHECK_POINTS: usize = 1000;

/// Checks the modelling assumptions a scenario must satisfy for the bounds to apply.
pub fn validate(scenario: &Scenario) -> ValidationReport {
    let mut checks = Vec::with_capacity(5);
    let s = scenario;

    let mut domain = Vec::new();
    if !(s.cost > 0.0) {
        domain.push(format!("cost {} must be positive", s.cost));
    }
    if !(s.wealth0 > s.cost) {
        domain.push(format!("wealth0 {} must exceed cost {}", s.wealth0, s.cost));
    }
    if s.utility.requires_positive_wealth() {
        let min_reward = s.rewards.null.min_value().min(s.rewards.alt.min_value());
        let lowest = (s.wealth0 - s.cost).min(s.wealth0 - s.cost + min_reward);
        if !(lowest > 0.0) {
            domain.push(format!("lowest reachable wealth {lowest} is not positive"));
        }
    }
    if let UtilityModel::Crra { gamma } = s.utility {
        if !(gamma < 1.0) {
            domain.push(format!("CRRA gamma {gamma} must be below 1"));
        }
    }
    checks.push(Check {
        name: CHECK_WEALTH_DOMAIN,
        passed: domain.is_empty(),
        detail: if domain.is_empty() { "ok".into() } else { domain.join("; ") },
    });

    let cost_detail = match (s.rewards.null.mean(), s.rewards.alt.mean()) {
        (Ok(m0), Ok(m1)) => {
            if m0 >= s.cost && m1 >= s.cost {
                Ok(format!("mean rewards ({m0}, {m1}) >= cost {}", s.cost))
            } else {
                Err(format!("mean rewards ({m0}, {m1}) fall below cost {}", s.cost))
            }
        }
        (Err(e), _) | (_, Err(e)) => Err(e.to_string()),
    };
    checks.push(Check {
        name: CHECK_NON_DOMINATING_COST,
        passed: cost_detail.is_ok(),
        detail: cost_detail.unwrap_or_else(|e| e),
    });

    let mono = stochastic_monotonicity(&s.rewards);
    checks.push(Check {
        name: CHECK_STOCHASTIC_MONOTONICITY,
        passed: mono.is_ok(),
        detail: mono.map(|_| "ok".to_string()).unwrap_or_else(|e| e),
    });

    let grid = (0..TAU_CHECK_POINTS).map(|i| i as f64 / (TAU_CHECK_POINTS - 1) as f64);
    let mut su_fail = None;
    let mut power_fail = None;
    if let TestModel::GaussianMean { theta1 } = s.test {
        if !(theta1 > 0.0) {
            power_fail = Some(format!("theta1 = {theta1} gives no power"));
        }
    }
    for tau in grid {
        let (b0, b1) = s.test.power_unchecked(tau);
        if su_fail.is_none() && b0 > tau + 1e-12 {
            su_fail = Some(format!("beta0({tau}) = {b0} > tau"));
        }
        if power_fail.is_none() && tau > 0.0 && tau < 1.0 && b1 <= b0 {
            power_fail = Some(format!("beta1({tau}) = {b1} <= beta0 = {b0}"));
        }
    }
    checks.push(Check {
        name: CHECK_SUPER_UNIFORMITY,
        passed: su_fail.is_none(),
        detail: su_fail.unwrap_or_else(|| "ok".into()),
    });
    checks.push(Check {
        name: CHECK_NON_TRIVIAL_POWER,
        passed: power_fail.is_none(),
        detail: power_fail.unwrap_or_else(|| "ok".into()),
    });

    ValidationReport { checks }
}

// Pointwise survival dominance P0(R ≥ r) ≤ P1(R ≥ r) on a grid over the union support.
fn stochastic_monotonicity(rewards: &RewardModel) -> std::result::Result<(), String> {
    if let (RewardDist::Constant { value: r0 }, RewardDist::Constant { value: r1 }) =
        (rewards.null, rewards.alt)
    {
        return if r0 <= r1 {
            Ok(())
        } else {
            Err(format!("null reward {r0} exceeds alternative reward {r1}"))
        };
    }
    let lo = rewards.null.min_value().min(rewards.alt.min_value());
    let hi = rewards.null.max_value().max(rewards.alt.max_value());
    let mut points: Vec<f64> = (0..SURVIVAL_CHECK_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (SURVIVAL_CHECK_POINTS - 1) as f64)
        .collect();
    for d in [rewards.null, rewards.alt] {
        points.push(d.min_value());
        points.push(d.max_value());
    }
    for r in points {
        let (s0, s1) = (rewards.null.survival(r), rewards.alt.survival(r));
        if s0 > s1 + 1e-12 {
            return Err(format!("P0(R >= {r}) = {s0} exceeds P1(R >= {r}) = {s1}"));
        }
    }
    Ok(())
}
