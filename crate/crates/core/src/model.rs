//! Model kinds, parameter sets and the filtering recursion.
//!
//! Every kind shares the base component
//! `s_t = omega + alpha*rv_{t-1} + beta*s_{t-1} + gamma*d_{t-1}*rv_{t-1}`
//! and differs in how the policy component `xi_t` is built and combined:
//!
//! | kind  | `xi_t`                                             | `mu_t`                      |
//! |-------|----------------------------------------------------|-----------------------------|
//! | AMEM  | 0                                                  | `s_t`                       |
//! | X-MAP | `delta*xc_{t-1} + phi*dc_t + beta*xi_{t-1}`        | `s_t + xi_t`                |
//! | MAP   | `delta*xc_{t-1} + phi*dc_t + psi*xi_{t-1}`         | `s_t + xi_t`                |
//! | L-MAP | as MAP                                             | `2 s_t logistic(xi_t)`      |
//! | P-MAP | `(1-psi) + delta*xc_{t-1} + phi*dc_t + psi*xi_{t-1}` | `s_t * xi_t`              |
//!
//! X-MAP is written in two-component form with the policy persistence tied to
//! `beta`, which is algebraically the single-equation model with exogenous
//! regressors.

use std::fmt;
use std::io::Write;
use std::ops::Range;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::data::{center_covariates, PanelSeries};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "AMEM")]
    Amem,
    #[serde(rename = "X-MAP")]
    Xmap,
    #[serde(rename = "MAP")]
    Map,
    #[serde(rename = "L-MAP")]
    Lmap,
    #[serde(rename = "P-MAP")]
    Pmap,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [ModelKind::Amem, ModelKind::Xmap, ModelKind::Map, ModelKind::Lmap, ModelKind::Pmap];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Amem => "AMEM",
            ModelKind::Xmap => "X-MAP",
            ModelKind::Map => "MAP",
            ModelKind::Lmap => "L-MAP",
            ModelKind::Pmap => "P-MAP",
        }
    }

    /// File-name friendly label.
    pub fn slug(self) -> &'static str {
        match self {
            ModelKind::Amem => "amem",
            ModelKind::Xmap => "xmap",
            ModelKind::Map => "map",
            ModelKind::Lmap => "lmap",
            ModelKind::Pmap => "pmap",
        }
    }

    pub fn has_policy(self) -> bool {
        self != ModelKind::Amem
    }

    /// Kinds with a separately persistent policy component (`psi`).
    pub fn is_component(self) -> bool {
        matches!(self, ModelKind::Map | ModelKind::Lmap | ModelKind::Pmap)
    }

    pub fn free_params(self) -> &'static [Param] {
        use Param::*;
        match self {
            ModelKind::Amem => &[Omega, Alpha, Beta, Gamma, Theta],
            ModelKind::Xmap => &[Omega, Alpha, Beta, Gamma, Delta, Phi, Theta],
            _ => &[Omega, Alpha, Beta, Gamma, Delta, Phi, Psi, Theta],
        }
    }

    pub fn n_free(self) -> usize {
        self.free_params().len()
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_uppercase();
        Ok(match norm.as_str() {
            "AMEM" => ModelKind::Amem,
            "XMAP" => ModelKind::Xmap,
            "MAP" => ModelKind::Map,
            "LMAP" => ModelKind::Lmap,
            "PMAP" => ModelKind::Pmap,
            _ => return Err(Error::arg(format!("unknown model kind `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    Omega,
    Alpha,
    Beta,
    Gamma,
    Delta,
    Phi,
    Psi,
    Theta,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::Omega => "omega",
            Param::Alpha => "alpha",
            Param::Beta => "beta",
            Param::Gamma => "gamma",
            Param::Delta => "delta",
            Param::Phi => "phi",
            Param::Psi => "psi",
            Param::Theta => "theta",
        }
    }
}

/// Full parameter vector. Entries not used by a kind are ignored by the filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub phi: f64,
    pub psi: f64,
    /// Gamma shape of the innovation.
    pub theta: f64,
}

impl ParamSet {
    pub fn amem(omega: f64, alpha: f64, beta: f64, gamma: f64, theta: f64) -> Self {
        Self { omega, alpha, beta, gamma, delta: 0.0, phi: 0.0, psi: 0.0, theta }
    }

    pub fn get(&self, p: Param) -> f64 {
        match p {
            Param::Omega => self.omega,
            Param::Alpha => self.alpha,
            Param::Beta => self.beta,
            Param::Gamma => self.gamma,
            Param::Delta => self.delta,
            Param::Phi => self.phi,
            Param::Psi => self.psi,
            Param::Theta => self.theta,
        }
    }

    pub fn set(&mut self, p: Param, v: f64) {
        match p {
            Param::Omega => self.omega = v,
            Param::Alpha => self.alpha = v,
            Param::Beta => self.beta = v,
            Param::Gamma => self.gamma = v,
            Param::Delta => self.delta = v,
            Param::Phi => self.phi = v,
            Param::Psi => self.psi = v,
            Param::Theta => self.theta = v,
        }
    }

    /// `alpha + beta + gamma/2`.
    pub fn persistence(&self) -> f64 {
        self.alpha + self.beta + 0.5 * self.gamma
    }

    /// Persistence of the policy component as used by `kind`.
    pub fn policy_persistence(&self, kind: ModelKind) -> f64 {
        match kind {
            ModelKind::Amem => 0.0,
            ModelKind::Xmap => self.beta,
            _ => self.psi,
        }
    }

    /// Values of the kind's free parameters, in [`ModelKind::free_params`] order.
    pub fn free_values(&self, kind: ModelKind) -> Vec<f64> {
        kind.free_params().iter().map(|&p| self.get(p)).collect()
    }

    /// Builds a parameter set from free values; unused entries are zero
    /// (X-MAP stores `psi = beta`).
    pub fn from_free(kind: ModelKind, values: &[f64]) -> Self {
        let mut out = ParamSet::amem(0.0, 0.0, 0.0, 0.0, 1.0);
        for (&p, &v) in kind.free_params().iter().zip(values) {
            out.set(p, v);
        }
        out.restrict(kind)
    }

    /// Zeroes the entries a kind does not use.
    pub fn restrict(mut self, kind: ModelKind) -> Self {
        match kind {
            ModelKind::Amem => {
                self.delta = 0.0;
                self.phi = 0.0;
                self.psi = 0.0;
            }
            ModelKind::Xmap => self.psi = self.beta,
            _ => {}
        }
        self
    }

    /// `omega, alpha, beta >= 0`, `theta > 0`, all finite.
    pub fn check_hard_bounds(&self) -> Result<()> {
        let all = [self.omega, self.alpha, self.beta, self.gamma, self.delta, self.phi, self.psi, self.theta];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Constraint("non-finite parameter".into()));
        }
        if self.omega < 0.0 || self.alpha < 0.0 || self.beta < 0.0 {
            return Err(Error::Constraint(format!(
                "omega, alpha, beta must be non-negative (got {}, {}, {})",
                self.omega, self.alpha, self.beta
            )));
        }
        if self.theta <= 0.0 {
            return Err(Error::Constraint(format!("theta must be positive, got {}", self.theta)));
        }
        Ok(())
    }

    /// Hard bounds, covariance stationarity and, for component kinds,
    /// `0 < psi < beta < 1`.
    pub fn check_constraints(&self, kind: ModelKind) -> Result<()> {
        self.check_hard_bounds()?;
        if self.persistence() >= 1.0 {
            return Err(Error::Constraint(format!("persistence {} >= 1", self.persistence())));
        }
        if kind.is_component() && !(0.0 < self.psi && self.psi < self.beta && self.beta < 1.0) {
            return Err(Error::Constraint(format!(
                "identification requires 0 < psi < beta < 1 (psi = {}, beta = {})",
                self.psi, self.beta
            )));
        }
        Ok(())
    }
}

/// Everything the recursion consumes: volatility, sign dummy, centered
/// covariates, the start-up level and the estimation window the centering and
/// start-up level were computed on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInputs {
    pub rv: Vec<f64>,
    pub neg: Vec<f64>,
    pub delta: Vec<u8>,
    pub xc: Vec<f64>,
    pub dc: Vec<f64>,
    pub x_bar: f64,
    pub delta_bar: f64,
    pub init_level: f64,
    pub window: Range<usize>,
}

impl ModelInputs {
    /// Centers covariates and sets the start-up level to the mean volatility
    /// over `window`. The inputs still span the whole panel.
    pub fn new(p: &PanelSeries, window: Range<usize>) -> Result<Self> {
        let c = center_covariates(p, window.clone())?;
        let init_level = p.rv()[window.clone()].iter().sum::<f64>() / (window.end - window.start) as f64;
        Ok(Self {
            rv: p.rv().to_vec(),
            neg: p.sign_dummy().as_f64(),
            delta: p.delta().to_vec(),
            xc: c.xc,
            dc: c.dc,
            x_bar: c.x_bar,
            delta_bar: c.delta_bar,
            init_level,
            window,
        })
    }

    pub fn full(p: &PanelSeries) -> Result<Self> {
        Self::new(p, 0..p.len())
    }

    pub fn with_init_level(mut self, level: f64) -> Self {
        self.init_level = level;
        self
    }

    pub fn len(&self) -> usize {
        self.rv.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rv.is_empty()
    }

    /// Indices entering the likelihood: the window minus the start-up row.
    pub fn likelihood_range(&self) -> Range<usize> {
        self.window.start.max(1)..self.window.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterOutput {
    pub kind: ModelKind,
    pub sigma: Vec<f64>,
    pub xi: Vec<f64>,
    pub mu: Vec<f64>,
    /// Standardized residuals `rv_t / mu_t`.
    pub eps: Vec<f64>,
    pub valid: bool,
    /// First index with a non-positive or non-finite conditional mean.
    pub invalid_at: Option<usize>,
}

impl FilterOutput {
    pub fn into_result(self) -> Result<Self> {
        match self.invalid_at {
            None => Ok(self),
            Some(index) => Err(Error::InvalidState {
                index,
                reason: format!("{} conditional mean not positive", self.kind),
            }),
        }
    }

    /// CSV with columns `date, sigma, xi, mu, eps`.
    pub fn write_csv<W: Write>(&self, dates: &[NaiveDate], writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["date", "sigma", "xi", "mu", "eps"])?;
        for (t, date) in dates.iter().enumerate().take(self.mu.len()) {
            w.write_record([
                date.format("%Y-%m-%d").to_string(),
                self.sigma[t].to_string(),
                self.xi[t].to_string(),
                self.mu[t].to_string(),
                self.eps[t].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Combines the base and policy components into the conditional mean.
#[inline]
pub fn compose(kind: ModelKind, sigma: f64, xi: f64) -> f64 {
    match kind {
        ModelKind::Amem | ModelKind::Xmap | ModelKind::Map => sigma + xi,
        ModelKind::Lmap => 2.0 * sigma * logistic(xi),
        ModelKind::Pmap => sigma * xi,
    }
}

/// Start-up value of the policy component.
pub fn initial_xi(kind: ModelKind) -> f64 {
    if kind == ModelKind::Pmap {
        1.0
    } else {
        0.0
    }
}

/// Coefficients of the policy recursion `xi_t = c + d*xc_{t-1} + f*dc_t + r*xi_{t-1}`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PolicyCoefs {
    pub intercept: f64,
    pub delta: f64,
    pub phi: f64,
    pub persistence: f64,
}

impl PolicyCoefs {
    pub fn new(kind: ModelKind, p: &ParamSet) -> Self {
        match kind {
            ModelKind::Amem => Self { intercept: 0.0, delta: 0.0, phi: 0.0, persistence: 0.0 },
            ModelKind::Xmap => Self { intercept: 0.0, delta: p.delta, phi: p.phi, persistence: p.beta },
            ModelKind::Map | ModelKind::Lmap => {
                Self { intercept: 0.0, delta: p.delta, phi: p.phi, persistence: p.psi }
            }
            ModelKind::Pmap => Self { intercept: 1.0 - p.psi, delta: p.delta, phi: p.phi, persistence: p.psi },
        }
    }

    #[inline]
    pub fn step(&self, xc_lag: f64, dc: f64, xi_lag: f64) -> f64 {
        self.intercept + self.delta * xc_lag + self.phi * dc + self.persistence * xi_lag
    }
}

/// Runs the recursion, handing `(t, sigma, xi, mu)` to `sink` for every row.
/// Stops at the first non-positive or non-finite mean and returns its index.
#[inline]
pub(crate) fn run_recursion(
    kind: ModelKind,
    p: &ParamSet,
    inp: &ModelInputs,
    mut sink: impl FnMut(usize, f64, f64, f64),
) -> std::result::Result<(), usize> {
    let n = inp.len();
    let pc = PolicyCoefs::new(kind, p);
    let mut s = inp.init_level;
    let mut xi = initial_xi(kind);
    let m = compose(kind, s, xi);
    if !(m > 0.0 && m.is_finite()) {
        return Err(0);
    }
    sink(0, s, xi, m);
    for t in 1..n {
        let rv = inp.rv[t - 1];
        s = p.omega + p.alpha * rv + p.beta * s + p.gamma * inp.neg[t - 1] * rv;
        xi = pc.step(inp.xc[t - 1], inp.dc[t], xi);
        let m = compose(kind, s, xi);
        if !(m > 0.0 && m.is_finite()) {
            return Err(t);
        }
        sink(t, s, xi, m);
    }
    Ok(())
}

/// Filters the whole input span. An invalid parameter point yields
/// `valid = false` with the offending index; later entries are NaN.
pub fn filter(kind: ModelKind, p: &ParamSet, inp: &ModelInputs) -> FilterOutput {
    let n = inp.len();
    let mut sigma = vec![f64::NAN; n];
    let mut xi = vec![f64::NAN; n];
    let mut mu = vec![f64::NAN; n];
    let res = run_recursion(kind, p, inp, |t, s, x, m| {
        sigma[t] = s;
        xi[t] = x;
        mu[t] = m;
    });
    let eps = inp.rv.iter().zip(&mu).map(|(r, m)| r / m).collect();
    let invalid_at = res.err();
    FilterOutput { kind, sigma, xi, mu, eps, valid: invalid_at.is_none(), invalid_at }
}

/// `omega / (1 - alpha - beta - gamma/2)`, shared by every kind since the
/// policy component is centered.
pub fn unconditional_mean(_kind: ModelKind, p: &ParamSet) -> Result<f64> {
    let pers = p.persistence();
    if !(pers < 1.0) {
        return Err(Error::Constraint(format!("persistence {pers} >= 1, no unconditional mean")));
    }
    Ok(p.omega / (1.0 - pers))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyShare {
    pub series: Vec<f64>,
    pub mean: f64,
}

/// Share `xi_t / mu_t` of the additive decomposition, averaged over `range`.
pub fn policy_share(f: &FilterOutput, range: Range<usize>) -> Result<PolicyShare> {
    if f.kind != ModelKind::Map {
        return Err(Error::arg(format!("policy share is defined for the additive MAP only, got {}", f.kind)));
    }
    if !f.valid {
        return Err(Error::Precondition("policy share needs a valid filter output".into()));
    }
    if range.start >= range.end || range.end > f.mu.len() {
        return Err(Error::arg(format!("range {range:?} empty or out of bounds")));
    }
    let series: Vec<f64> = f.xi.iter().zip(&f.mu).map(|(x, m)| x / m).collect();
    let mean = series[range.clone()].iter().sum::<f64>() / (range.end - range.start) as f64;
    Ok(PolicyShare { series, mean })
}
