//! Drug-approval table: conservative FDR bounds for three approval protocols,
//! three effective-drug rewards and three levels of risk aversion.
//!
//! Money is in millions of dollars. Each cell uses κ ≡ 1 and constant rewards
//! R0 and R1, so only the mean rewards enter.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::csv_out::{self, csv_err, fmt_sig};
use crate::agent::deltas_from_means;
use crate::bounds;
use crate::error::{Error, Result};
use crate::model::UtilityModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// p < 0.05 (two-sided) in two independent trials.
    Standard,
    /// p < 0.01 (two-sided) in a single trial.
    Modernized,
    /// Two trials, either with p < 0.05 (two-sided).
    Accelerated,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::Standard, Protocol::Modernized, Protocol::Accelerated];

    /// One-sided type I error.
    pub fn tau(&self) -> f64 {
        match self {
            Self::Standard => 0.025 * 0.025,
            Self::Modernized => 0.005,
            Self::Accelerated => 0.05,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Standard => "standard",
            Self::Modernized => "modernized",
            Self::Accelerated => "accelerated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdaConfig {
    pub wealth0: f64,
    pub cost: f64,
    pub reward0: f64,
    pub reward1: Vec<f64>,
    /// Risk aversion per column; 0 is risk neutral.
    pub gammas: Vec<f64>,
    pub protocols: Vec<Protocol>,
}

impl Default for FdaConfig {
    fn default() -> Self {
        Self {
            wealth0: 5000.0,
            cost: 200.0,
            reward0: 800.0,
            reward1: vec![1000.0, 25_000.0, 50_000.0],
            gammas: vec![0.0, 0.35, 0.7],
            protocols: Protocol::ALL.to_vec(),
        }
    }
}

/// One table row; percentages, `None` where the bound is at least 100%.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdaRow {
    pub protocol: Protocol,
    pub tau: f64,
    pub reward1: f64,
    /// τ R1 / c.
    pub bates_pct: Option<f64>,
    /// Conservative bound per entry of `FdaConfig::gammas`.
    pub bound_pct: Vec<Option<f64>>,
}

fn percent(v: f64) -> Option<f64> {
    (v < 1.0).then(|| 100.0 * v.max(0.0))
}

pub fn fda_table(config: &FdaConfig) -> Result<Vec<FdaRow>> {
    if !(config.cost > 0.0 && config.wealth0 > config.cost) {
        return Err(Error::InvalidArgument("need 0 < cost < wealth0".into()));
    }
    let utilities: Vec<UtilityModel> = config.gammas.iter().map(|&g| UtilityModel::crra(g)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &protocol in &config.protocols {
        let tau = protocol.tau();
        for &r1 in &config.reward1 {
            let bound_pct = utilities
                .iter()
                .map(|u| {
                    let d = deltas_from_means(u, config.wealth0, config.cost, config.reward0, r1)?;
                    Ok(percent(bounds::fdr_bound_conservative(tau, 1.0, &d)?.value))
                })
                .collect::<Result<_>>()?;
            rows.push(FdaRow {
                protocol,
                tau,
                reward1: r1,
                bates_pct: percent(bounds::bates_bound(tau, r1, config.cost).value),
                bound_pct,
            });
        }
    }
    Ok(rows)
}

fn cell(v: Option<f64>) -> String {
    v.map(fmt_sig).unwrap_or_else(|| "n/a".into())
}

/// Columns: protocol, tau_pct, reward1, bates_pct, then one `gamma_<g>_pct` per
/// risk level.
pub fn write_csv<W: Write>(config: &FdaConfig, rows: &[FdaRow], out: W) -> Result<()> {
    let mut w = csv_out::writer(out);
    let mut header = vec!["protocol".to_string(), "tau_pct".into(), "reward1".into(), "bates_pct".into()];
    header.extend(config.gammas.iter().map(|g| format!("gamma_{g}_pct")));
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut rec = vec![r.protocol.name().to_string(), fmt_sig(100.0 * r.tau), fmt_sig(r.reward1), cell(r.bates_pct)];
        rec.extend(r.bound_pct.iter().map(|&v| cell(v)));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Config(format!("csv output: {e}")))?;
    Ok(())
}
