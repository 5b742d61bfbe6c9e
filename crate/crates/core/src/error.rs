use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("truncation interval carries no probability mass (mass = {mass:e})")]
    DegenerateSupport { mass: f64 },

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("no sign change on bracket [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("model invariant violated: {0}")]
    ModelInvariant(String),

    #[error("power assumption violated: beta1 = {beta1} must exceed beta0 = {beta0}")]
    PowerAssumption { beta0: f64, beta1: f64 },

    #[error("envelope kappa = {kappa} is below tau = {tau}")]
    Envelope { tau: f64, kappa: f64 },

    #[error("assumption violated: bound denominator {0:e} is not positive")]
    DegenerateDenominator(f64),

    #[error("posterior undefined: approval probability is zero (prior_null = {prior_null})")]
    UndefinedPosterior { prior_null: f64 },

    #[error("tau = {tau} lies outside the region where beta0 is in (0, L/delta0) and the ideal agent opts in")]
    Region { tau: f64 },

    #[error("epsilon = {epsilon} is not below Psi(tau_{index}) = {psi}")]
    InfeasibleEpsilon { epsilon: f64, index: usize, psi: f64 },

    #[error("invalid mixture: {0}")]
    Mixture(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),
}
