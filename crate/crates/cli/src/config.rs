//! Declarative run configuration. Every field has a default, unknown keys are
//! rejected, and command-line flags are applied on top.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use mapvol::data::ColumnMap;
use mapvol::forecast::ConvergenceRule;
use mapvol::simulate::XRule;
use mapvol::{LossKind, ModelKind, ParamSet};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
    Csv,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for multi-start perturbations, bootstrap and simulation.
    pub seed: u64,
    /// Worker threads; 0 lets the runtime decide.
    pub threads: usize,
    pub output_dir: PathBuf,
    pub formats: Vec<Format>,
    pub data: DataConfig,
    pub estimation: EstimationConfig,
    pub forecast: ForecastConfig,
    pub evaluation: EvaluationConfig,
    pub mcs: McsConfig,
    pub simulate: SimulateConfig,
    pub stylized: StylizedConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            threads: 0,
            output_dir: PathBuf::from("mapvol-out"),
            formats: vec![Format::Json, Format::Text, Format::Csv, Format::Svg],
            data: DataConfig::default(),
            estimation: EstimationConfig::default(),
            forecast: ForecastConfig::default(),
            evaluation: EvaluationConfig::default(),
            mcs: McsConfig::default(),
            simulate: SimulateConfig::default(),
            stylized: StylizedConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub input: Option<PathBuf>,
    pub delimiter: char,
    pub columns: ColumnMap,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self { input: None, delimiter: ',', columns: ColumnMap::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimationConfig {
    pub models: Vec<ModelKind>,
    /// First and last day of the estimation window; the whole panel by default.
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
    pub starts: usize,
    pub max_iter: usize,
    pub grad_tol: f64,
    pub se_grad_tol: f64,
    /// Impose `psi < beta`; `false` gives the unconstrained diagnostic refit.
    pub psi_below_beta: bool,
    pub min_window: usize,
    pub lb_lags: Vec<usize>,
    /// Horizons of the reported marginal effects.
    pub marginal_taus: Vec<usize>,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self {
            models: ModelKind::ALL.to_vec(),
            start: None,
            end: None,
            starts: 5,
            max_iter: 500,
            grad_tol: 1e-6,
            se_grad_tol: 1e-3,
            psi_below_beta: true,
            min_window: 50,
            lb_lags: vec![1, 5, 10],
            marginal_taus: vec![0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FutureRule {
    /// Proxy held at its origin value; announcements at their mean.
    Default,
    /// Use the values observed after the origin where the panel has them.
    Observed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastConfig {
    pub horizon: usize,
    /// Forecast origin; the last day of the estimation window by default.
    pub origin: Option<NaiveDate>,
    /// Convergence tolerance in volatility units.
    pub tolerance: f64,
    pub convergence_rule: ConvergenceRule,
    pub x_rule: FutureRule,
    pub delta_rule: FutureRule,
    /// Monte Carlo draws per path; 0 uses the plug-in recursion.
    pub monte_carlo_draws: usize,
    pub max_horizon: usize,
    /// Proxy shock for impulse responses; the sample s.d. of the proxy by default.
    pub irf_shock: Option<f64>,
    /// Reuse estimates from a previous `estimates.json` instead of refitting.
    pub estimates: Option<PathBuf>,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        Self {
            horizon: 250,
            origin: None,
            tolerance: 0.01,
            convergence_rule: ConvergenceRule::SuccessiveDifference,
            x_rule: FutureRule::Default,
            delta_rule: FutureRule::Default,
            monte_carlo_draws: 0,
            max_horizon: 750,
            irf_shock: None,
            estimates: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Fixed,
    Expanding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    /// Last in-sample day of each out-of-sample exercise.
    pub splits: Vec<NaiveDate>,
    /// Last evaluation day; one year after each split by default.
    pub eval_end: Option<NaiveDate>,
    pub min_eval_days: usize,
    pub scheme: Scheme,
    pub refit_every: usize,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self { splits: Vec::new(), eval_end: None, min_eval_days: 250, scheme: Scheme::Fixed, refit_every: 22 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McsConfig {
    pub level: f64,
    pub replications: usize,
    pub block_length: f64,
    pub losses: Vec<LossKind>,
}

impl Default for McsConfig {
    fn default() -> Self {
        Self { level: 0.10, replications: 5000, block_length: 22.0, losses: vec![LossKind::Mse, LossKind::QLike] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub kind: ModelKind,
    pub t_len: usize,
    pub start_date: NaiveDate,
    /// True parameters; typical magnitudes for `kind` by default.
    pub params: Option<ParamSet>,
    pub x: XRule,
    /// Announcement spacing in days; 0 disables announcements.
    pub announce_every: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            kind: ModelKind::Map,
            t_len: 2500,
            start_date: NaiveDate::from_ymd_opt(2005, 1, 3).expect("valid date"),
            params: None,
            x: XRule::default(),
            announce_every: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StylizedConfig {
    pub window: usize,
}

impl Default for StylizedConfig {
    fn default() -> Self {
        Self { window: 5 }
    }
}

/// Parameter magnitudes typical of daily annualized volatility.
pub fn default_params(kind: ModelKind) -> ParamSet {
    let p = match kind {
        ModelKind::Amem => ParamSet::amem(0.857, 0.171, 0.708, 0.113, 7.559),
        ModelKind::Xmap => {
            ParamSet { omega: 1.136, alpha: 0.165, beta: 0.689, gamma: 0.120, delta: -0.636, phi: 1.297, psi: 0.0, theta: 7.728 }
        }
        ModelKind::Map => {
            ParamSet { omega: 1.056, alpha: 0.154, beta: 0.707, gamma: 0.117, delta: -1.836, phi: 2.817, psi: 0.111, theta: 7.817 }
        }
        ModelKind::Lmap => {
            ParamSet { omega: 1.011, alpha: 0.151, beta: 0.712, gamma: 0.119, delta: -0.297, phi: 0.464, psi: 0.194, theta: 7.827 }
        }
        ModelKind::Pmap => {
            ParamSet { omega: 1.025, alpha: 0.153, beta: 0.709, gamma: 0.119, delta: -0.161, phi: 0.231, psi: 0.134, theta: 7.820 }
        }
    };
    p.restrict(kind)
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::usage(format!("invalid configuration: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read configuration {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.estimation.models.is_empty() {
            return Err(CliError::usage("no models selected"));
        }
        if !self.data.delimiter.is_ascii() {
            return Err(CliError::usage("delimiter must be a single ASCII character"));
        }
        if !(self.mcs.level > 0.0 && self.mcs.level < 1.0) {
            return Err(CliError::usage("mcs.level must lie in (0, 1)"));
        }
        if self.forecast.horizon == 0 {
            return Err(CliError::usage("forecast.horizon must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = RunConfig::from_toml("[estimation]\nmodel = [\"MAP\"]\n").unwrap_err();
        assert_eq!(e.code, crate::error::ExitCode::Usage);
        assert!(e.message.contains("model"), "{}", e.message);
    }

    #[test]
    fn nested_values_parse() {
        let c = RunConfig::from_toml(
            r#"
seed = 7
formats = ["json"]
[data]
input = "panel.csv"
delimiter = ";"
[data.columns]
rv = "rk"
[estimation]
models = ["AMEM", "X-MAP"]
end = "2017-12-29"
[forecast]
convergence_rule = "distance_to_limit"
[evaluation]
splits = ["2015-12-31", "2016-12-30"]
[mcs]
losses = ["QLike"]
[simulate]
kind = "L-MAP"
x = { random_walk = { start = 0.1, drift = 0.0, sd = 0.003 } }
"#,
        )
        .unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.data.columns.rv, "rk");
        assert_eq!(c.data.columns.date, "date");
        assert_eq!(c.estimation.models, vec![ModelKind::Amem, ModelKind::Xmap]);
        assert_eq!(c.forecast.convergence_rule, ConvergenceRule::DistanceToLimit);
        assert_eq!(c.evaluation.splits.len(), 2);
        assert_eq!(c.simulate.kind, ModelKind::Lmap);
    }
}
