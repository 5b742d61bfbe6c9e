//! Scenario configuration files.
//!
//! JSON with a required `scenario` section and an optional `mixture`:
//!
//! ```json
//! {
//!   "scenario": {
//!     "wealth0": 20.0,
//!     "cost": 10.0,
//!     "utility": { "kind": "crra", "gamma": 0.35 },
//!     "rewards": {
//!       "null": { "kind": "constant", "value": 25.0 },
//!       "alt":  { "kind": "trunc_normal", "mu": 150.0, "sigma": 25.0,
//!                 "support": { "lo": 120.0, "hi": 180.0 } }
//!     },
//!     "test": { "kind": "gaussian_mean", "theta1": 1.0 }
//!   },
//!   "mixture": { "types": [ { "prior_null": 0.3, "weight": 0.1 },
//!                           { "prior_null": 0.8, "weight": 0.9 } ] }
//! }
//! ```
//!
//! `utility.kind` is one of `linear`, `crra` (with `gamma < 1`) or `log`.
//! `test.kind` is `gaussian_mean` or `explicit`; explicit tests give `beta0` and
//! `beta1` as lists of `[tau, beta]` knots, interpolated linearly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AgentMixture, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub scenario: Scenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixture: Option<AgentMixture>,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn mixture(&self) -> Result<&AgentMixture> {
        self.mixture
            .as_ref()
            .ok_or_else(|| Error::Config("this command needs a `mixture` section".into()))
    }
}
