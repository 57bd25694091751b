//! Forecast losses, out-of-sample runs and the Model Confidence Set.

pub mod mcs;

use std::fmt;
use std::io::Write;
use std::ops::Range;
use std::str::FromStr;

use chrono::{Months, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::data::PanelSeries;
use crate::error::{Error, Result};
use crate::estimate::{fit, EstimationResult, FitOptions};
use crate::model::{filter, ModelInputs, ModelKind};

pub use mcs::{model_confidence_set, McsOptions, McsResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LossKind {
    #[serde(rename = "MSE")]
    Mse,
    #[serde(rename = "QLike")]
    QLike,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Mse => "MSE",
            LossKind::QLike => "QLike",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mse" => Ok(LossKind::Mse),
            "qlike" => Ok(LossKind::QLike),
            _ => Err(Error::arg(format!("unknown loss `{s}`"))),
        }
    }
}

/// Per-day losses: `(rv - f)^2` or `rv/f - ln(rv/f) - 1`.
pub fn losses(forecasts: &[f64], realized: &[f64], kind: LossKind) -> Result<Vec<f64>> {
    if forecasts.len() != realized.len() {
        return Err(Error::arg(format!(
            "forecast length {} differs from realized length {}",
            forecasts.len(),
            realized.len()
        )));
    }
    if let Some(t) = realized.iter().position(|r| !(*r > 0.0)) {
        return Err(Error::arg(format!("realized value at {t} is not positive")));
    }
    match kind {
        LossKind::Mse => Ok(forecasts.iter().zip(realized).map(|(f, r)| (r - f) * (r - f)).collect()),
        LossKind::QLike => forecasts
            .iter()
            .zip(realized)
            .enumerate()
            .map(|(t, (f, r))| {
                if !(*f > 0.0) {
                    return Err(Error::arg(format!("QLike needs a positive forecast, got {f} at {t}")));
                }
                let ratio = r / f;
                Ok(ratio - ratio.ln() - 1.0)
            })
            .collect(),
    }
}

/// Losses of several models on a shared evaluation index, one column per model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossMatrix {
    pub loss: LossKind,
    pub models: Vec<String>,
    pub dates: Vec<NaiveDate>,
    pub split: Option<NaiveDate>,
    columns: Vec<Vec<f64>>,
}

impl LossMatrix {
    pub fn new(loss: LossKind, models: Vec<String>, dates: Vec<NaiveDate>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if models.len() != columns.len() {
            return Err(Error::arg("one column per model required"));
        }
        for (name, col) in models.iter().zip(&columns) {
            if col.len() != dates.len() {
                return Err(Error::arg(format!("column `{name}` has {} rows, index has {}", col.len(), dates.len())));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::arg(format!("column `{name}` has missing or non-finite entries")));
            }
            if loss == LossKind::QLike && col.iter().any(|v| *v < -1e-12) {
                return Err(Error::arg(format!("column `{name}` has negative QLike entries")));
            }
        }
        Ok(Self { loss, models, dates, split: None, columns })
    }

    pub fn with_split(mut self, split: NaiveDate) -> Self {
        self.split = Some(split);
        self
    }

    pub fn n_models(&self) -> usize {
        self.columns.len()
    }

    pub fn n_obs(&self) -> usize {
        self.dates.len()
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn mean_losses(&self) -> Vec<f64> {
        self.columns.iter().map(|c| c.iter().sum::<f64>() / c.len() as f64).collect()
    }

    /// Reorders columns: new column `k` is old column `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            loss: self.loss,
            models: order.iter().map(|&i| self.models[i].clone()).collect(),
            dates: self.dates.clone(),
            split: self.split,
            columns: order.iter().map(|&i| self.columns[i].clone()).collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["date".to_string()];
        header.extend(self.models.iter().cloned());
        w.write_record(&header)?;
        for (t, d) in self.dates.iter().enumerate() {
            let mut row = vec![d.format("%Y-%m-%d").to_string()];
            row.extend(self.columns.iter().map(|c| c[t].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimationScheme {
    /// Estimate once on the pre-split window.
    Fixed,
    /// Re-estimate on an expanding window every `refit_every` evaluation days.
    Expanding { refit_every: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OosOptions {
    pub fit: FitOptions,
    pub scheme: EstimationScheme,
    pub min_eval_days: usize,
    /// Last evaluation date; defaults to one calendar year after the split.
    pub eval_end: Option<NaiveDate>,
}

impl Default for OosOptions {
    fn default() -> Self {
        Self { fit: FitOptions::default(), scheme: EstimationScheme::Fixed, min_eval_days: 250, eval_end: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFailure {
    pub kind: ModelKind,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OosRun {
    pub split: NaiveDate,
    pub estimation: Range<usize>,
    pub evaluation: Range<usize>,
    pub kinds: Vec<ModelKind>,
    pub forecasts: Vec<Vec<f64>>,
    pub mse: LossMatrix,
    pub qlike: LossMatrix,
    pub fits: Vec<EstimationResult>,
    pub failures: Vec<ModelFailure>,
}

impl OosRun {
    pub fn matrix(&self, loss: LossKind) -> &LossMatrix {
        match loss {
            LossKind::Mse => &self.mse,
            LossKind::QLike => &self.qlike,
        }
    }
}

fn one_step_forecasts(
    kind: ModelKind,
    panel: &PanelSeries,
    est: Range<usize>,
    eval: Range<usize>,
    opts: &OosOptions,
) -> Result<(Vec<f64>, EstimationResult)> {
    let fit_and_filter = |est_end: usize, upto: usize| -> Result<(Vec<f64>, EstimationResult)> {
        let sub = panel.slice(0..upto)?;
        let inp = ModelInputs::new(&sub, est.start..est_end)?;
        let res = fit(kind, &inp, &opts.fit)?;
        let f = filter(kind, &res.params, &inp).into_result()?;
        Ok((f.mu, res))
    };
    match opts.scheme {
        EstimationScheme::Fixed => {
            let (mu, res) = fit_and_filter(est.end, eval.end)?;
            Ok((mu[eval].to_vec(), res))
        }
        EstimationScheme::Expanding { refit_every } => {
            let step = refit_every.max(1);
            let mut out = Vec::with_capacity(eval.len());
            let mut first = None;
            let mut s = eval.start;
            while s < eval.end {
                let e = (s + step).min(eval.end);
                let (mu, res) = fit_and_filter(s, e)?;
                out.extend_from_slice(&mu[s..e]);
                first.get_or_insert(res);
                s = e;
            }
            Ok((out, first.expect("non-empty evaluation window")))
        }
    }
}

/// Estimates every kind on data through `split` and evaluates one-step
/// forecasts over the following period. Models whose estimation fails are
/// reported in `failures` and left out of the loss matrices.
pub fn oos_forecast_run(kinds: &[ModelKind], panel: &PanelSeries, split: NaiveDate, opts: &OosOptions) -> Result<OosRun> {
    let est_end = panel.count_through(split);
    let eval_end_date = opts
        .eval_end
        .or_else(|| split.checked_add_months(Months::new(12)))
        .ok_or_else(|| Error::arg("cannot derive evaluation end date"))?;
    let eval_end = panel.count_through(eval_end_date);
    if est_end < opts.fit.min_window + 1 {
        return Err(Error::arg(format!("only {est_end} observations before split {split}")));
    }
    if eval_end <= est_end || eval_end - est_end < opts.min_eval_days {
        return Err(Error::arg(format!(
            "split {split} leaves {} evaluation days, need {}",
            eval_end.saturating_sub(est_end),
            opts.min_eval_days
        )));
    }
    let est = 0..est_end;
    let eval = est_end..eval_end;
    let realized = &panel.rv()[eval.clone()];
    let dates = panel.dates()[eval.clone()].to_vec();

    let mut ok_kinds = Vec::new();
    let mut forecasts = Vec::new();
    let mut fits = Vec::new();
    let mut failures = Vec::new();
    for &kind in kinds {
        match one_step_forecasts(kind, panel, est.clone(), eval.clone(), opts) {
            Ok((mu, res)) => {
                ok_kinds.push(kind);
                forecasts.push(mu);
                fits.push(res);
            }
            Err(e) => {
                log::warn!("{kind}: out-of-sample run failed: {e}");
                failures.push(ModelFailure { kind, error: e.to_string() });
            }
        }
    }
    if ok_kinds.is_empty() {
        return Err(Error::Optimizer("every model failed to estimate".into()));
    }
    let names: Vec<String> = ok_kinds.iter().map(|k| k.name().to_string()).collect();
    let build = |loss| -> Result<LossMatrix> {
        let cols = forecasts.iter().map(|f| losses(f, realized, loss)).collect::<Result<Vec<_>>>()?;
        Ok(LossMatrix::new(loss, names.clone(), dates.clone(), cols)?.with_split(split))
    };
    Ok(OosRun {
        split,
        estimation: est,
        evaluation: eval,
        mse: build(LossKind::Mse)?,
        qlike: build(LossKind::QLike)?,
        kinds: ok_kinds,
        forecasts,
        fits,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_forecast_zero_loss() {
        let rv = [1.0, 2.5, 7.0];
        assert!(losses(&rv, &rv, LossKind::Mse).unwrap().iter().all(|&v| v == 0.0));
        assert!(losses(&rv, &rv, LossKind::QLike).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn loss_values() {
        let mse = losses(&[1.0], &[2.0], LossKind::Mse).unwrap()[0];
        let ql = losses(&[1.0], &[2.0], LossKind::QLike).unwrap()[0];
        assert_eq!(mse, 1.0);
        assert!((ql - (2.0 - 2f64.ln() - 1.0)).abs() < 1e-15);
        assert!((ql - 0.306_852_819_440_054_7).abs() < 1e-12);
    }

    #[test]
    fn qlike_minimized_at_realized() {
        let rv = 3.7;
        let at = |f: f64| losses(&[f], &[rv], LossKind::QLike).unwrap()[0];
        for f in [1.0, 2.0, 3.6, 3.8, 5.0, 20.0] {
            assert!(at(f) > at(rv));
        }
    }

    #[test]
    fn qlike_rejects_nonpositive_forecast() {
        assert!(losses(&[0.0], &[1.0], LossKind::QLike).is_err());
        assert!(losses(&[0.0], &[1.0], LossKind::Mse).is_ok());
        assert!(losses(&[1.0, 2.0], &[1.0], LossKind::Mse).is_err());
    }

    #[test]
    fn loss_matrix_validation() {
        let d = vec![NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(); 2];
        assert!(LossMatrix::new(LossKind::Mse, vec!["a".into()], d.clone(), vec![vec![1.0]]).is_err());
        assert!(LossMatrix::new(LossKind::QLike, vec!["a".into()], d.clone(), vec![vec![1.0, -1.0]]).is_err());
        assert!(LossMatrix::new(LossKind::Mse, vec!["a".into()], d, vec![vec![1.0, f64::NAN]]).is_err());
    }
}
