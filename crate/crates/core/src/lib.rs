//! Multiplicative error models of realized volatility with policy
//! announcement and implementation effects.
//!
//! The crate covers ingestion ([`data`]), the filtering recursions
//! ([`model`]), Gamma quasi-maximum-likelihood estimation ([`estimate`]),
//! forecasts, impulse responses and marginal effects ([`forecast`]), loss
//! evaluation and the Model Confidence Set ([`evaluate`]), and simulation
//! ([`simulate`]).

// `!(a > b)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod estimate;
pub mod evaluate;
pub mod forecast;
pub mod model;
pub mod optim;
pub mod report;
pub mod simulate;

pub use data::{load_panel, read_panel, write_panel, ColumnMap, LoadOptions, PanelSeries};
pub use error::{Error, Result};
pub use estimate::{fit, fit_panel, EstimationResult, FitOptions};
pub use evaluate::{model_confidence_set, oos_forecast_run, LossKind, LossMatrix, McsOptions, McsResult};
pub use forecast::{
    impulse_response, marginal_effects, multi_step_forecast, ConvergenceRule, ForecastOrigin, ForecastPath,
    ForecastRules, IrfPath, MarginalEffect, PolicyVariable,
};
pub use model::{filter, FilterOutput, ModelInputs, ModelKind, Param, ParamSet};
pub use simulate::{simulate_panel, SimScenario};
