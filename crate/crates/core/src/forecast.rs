//! Multi-step forecasts, convergence horizons, impulse responses and the
//! closed-form marginal effects of the policy variables.
//!
//! Beyond the first step the sign dummy is replaced by its probability 1/2,
//! so the base component follows
//! `s_h = omega + (alpha + gamma/2) * mu_{h-1} + beta * s_{h-1}`.
//! The policy component is deterministic given the covariate rules, which
//! makes the plug-in composition exact in expectation for every kind. The
//! Monte Carlo mode averages simulated paths and is kept as a check.

use std::io::Write;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{compose, logistic, unconditional_mean, FilterOutput, ModelInputs, ModelKind, ParamSet, PolicyCoefs};
use crate::simulate::gamma_draw;

/// Filter state at the forecast origin `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastOrigin {
    pub index: usize,
    pub sigma: f64,
    pub xi: f64,
    pub rv: f64,
    pub neg: f64,
    /// Centered proxy `x_t - x_bar`.
    pub xc: f64,
    pub x_bar: f64,
    pub delta_bar: f64,
}

impl ForecastOrigin {
    pub fn from_filter(f: &FilterOutput, inp: &ModelInputs, t: usize) -> Result<Self> {
        if t >= inp.len() || t >= f.mu.len() {
            return Err(Error::arg(format!("forecast origin {t} beyond sample of {}", inp.len())));
        }
        if f.invalid_at.is_some_and(|i| i <= t) || !f.mu[t].is_finite() {
            return Err(Error::Precondition(format!("filter state at origin {t} is not valid")));
        }
        Ok(Self {
            index: t,
            sigma: f.sigma[t],
            xi: f.xi[t],
            rv: inp.rv[t],
            neg: inp.neg[t],
            xc: inp.xc[t],
            x_bar: inp.x_bar,
            delta_bar: inp.delta_bar,
        })
    }

    pub fn last(f: &FilterOutput, inp: &ModelInputs) -> Result<Self> {
        Self::from_filter(f, inp, inp.len() - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum XForecastRule {
    /// Keep the proxy at its origin value (random-walk expectation).
    #[default]
    Hold,
    /// Future proxy values `x_{t+1}, x_{t+2}, ...`; the last value is held.
    Path(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DeltaForecastRule {
    /// Announcements at their sample frequency, i.e. centered zero.
    #[default]
    Mean,
    /// Known announcement flags for `t+1, t+2, ...`; later days use the mean.
    Calendar(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[derive(Default)]
pub enum ForecastMode {
    #[default]
    PlugIn,
    MonteCarlo { draws: usize, seed: u64 },
}


#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForecastRules {
    pub x: XForecastRule,
    pub delta: DeltaForecastRule,
    /// Added to every proxy value entering the forecast.
    pub x_shock: f64,
    pub mode: ForecastMode,
    pub max_horizon: usize,
}

impl Default for ForecastRules {
    fn default() -> Self {
        Self {
            x: XForecastRule::Hold,
            delta: DeltaForecastRule::Mean,
            x_shock: 0.0,
            mode: ForecastMode::PlugIn,
            max_horizon: 750,
        }
    }
}

impl ForecastRules {
    /// Centered proxy entering step `h` (1-based), i.e. `x_{t+h-1}`.
    fn xc(&self, o: &ForecastOrigin, h: usize) -> f64 {
        let raw = match &self.x {
            XForecastRule::Hold => o.xc,
            XForecastRule::Path(v) if h >= 2 && !v.is_empty() => v[(h - 2).min(v.len() - 1)] - o.x_bar,
            XForecastRule::Path(_) => o.xc,
        };
        raw + self.x_shock
    }

    /// Centered announcement flag at `t+h`.
    fn dc(&self, o: &ForecastOrigin, h: usize) -> f64 {
        match &self.delta {
            DeltaForecastRule::Mean => 0.0,
            DeltaForecastRule::Calendar(v) => v.get(h - 1).map_or(0.0, |&d| f64::from(d) - o.delta_bar),
        }
    }

    fn describe(&self) -> (String, String) {
        let x = match &self.x {
            XForecastRule::Hold => "hold".to_string(),
            XForecastRule::Path(v) => format!("path({})", v.len()),
        };
        let d = match &self.delta {
            DeltaForecastRule::Mean => "mean".to_string(),
            DeltaForecastRule::Calendar(v) => format!("calendar({})", v.len()),
        };
        (x, d)
    }
}

/// How the convergence horizon is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceRule {
    /// First `h` with `|mu_{h+1} - mu_h| <= tol`.
    #[default]
    SuccessiveDifference,
    /// First `h` with `|mu_h - limit| <= tol`.
    DistanceToLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub rule: ConvergenceRule,
    pub tol: f64,
    /// `None` when the path never meets the tolerance.
    pub horizon: Option<usize>,
    pub limit: f64,
}

/// Smallest 1-based step meeting the rule, or `None` if no step does.
/// `limit` is only read by [`ConvergenceRule::DistanceToLimit`].
pub fn convergence_horizon(mu: &[f64], tol: f64, rule: ConvergenceRule, limit: f64) -> Result<Option<usize>> {
    if tol < 0.0 || tol.is_nan() {
        return Err(Error::arg(format!("tolerance must be non-negative, got {tol}")));
    }
    match rule {
        ConvergenceRule::SuccessiveDifference => {
            if mu.len() < 2 {
                return Err(Error::arg("convergence needs a path of at least 2 steps"));
            }
            Ok(mu.windows(2).position(|w| (w[1] - w[0]).abs() <= tol).map(|i| i + 1))
        }
        ConvergenceRule::DistanceToLimit => {
            if mu.is_empty() {
                return Err(Error::arg("convergence needs a non-empty path"));
            }
            Ok(mu.iter().position(|m| (m - limit).abs() <= tol).map(|i| i + 1))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastPath {
    pub kind: ModelKind,
    pub origin: usize,
    pub horizon: usize,
    /// `mu_{t+1}, ..., mu_{t+H}`.
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub xi: Vec<f64>,
    pub x_rule: String,
    pub delta_rule: String,
    pub x_shock: f64,
    pub mode: ForecastMode,
    pub unconditional_mean: f64,
}

impl ForecastPath {
    pub fn convergence(&self, tol: f64, rule: ConvergenceRule) -> Result<Convergence> {
        let horizon = convergence_horizon(&self.mu, tol, rule, self.unconditional_mean)?;
        Ok(Convergence { rule, tol, horizon, limit: self.unconditional_mean })
    }

    /// CSV with columns `step, mu, sigma, xi`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["step", "mu", "sigma", "xi"])?;
        for h in 0..self.horizon {
            w.write_record([
                (h + 1).to_string(),
                self.mu[h].to_string(),
                self.sigma[h].to_string(),
                self.xi[h].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn policy_path(kind: ModelKind, p: &ParamSet, o: &ForecastOrigin, rules: &ForecastRules, horizon: usize) -> Vec<f64> {
    let pc = PolicyCoefs::new(kind, p);
    let mut xi = o.xi;
    (1..=horizon)
        .map(|h| {
            xi = pc.step(rules.xc(o, h), rules.dc(o, h), xi);
            xi
        })
        .collect()
}

fn check_horizon(horizon: usize, rules: &ForecastRules) -> Result<()> {
    if horizon == 0 {
        return Err(Error::arg("forecast horizon must be at least 1"));
    }
    if horizon > rules.max_horizon {
        return Err(Error::arg(format!("horizon {horizon} exceeds the maximum {}", rules.max_horizon)));
    }
    Ok(())
}

fn invalid_step(kind: ModelKind, h: usize, m: f64) -> Error {
    Error::InvalidState { index: h, reason: format!("{kind} forecast {m} at step {h} not positive") }
}

/// Expected-volatility path from the origin state.
pub fn multi_step_forecast(
    kind: ModelKind,
    p: &ParamSet,
    origin: &ForecastOrigin,
    rules: &ForecastRules,
    horizon: usize,
) -> Result<ForecastPath> {
    check_horizon(horizon, rules)?;
    let p = (*p).restrict(kind);
    let limit = unconditional_mean(kind, &p)?;
    let xi = policy_path(kind, &p, origin, rules, horizon);
    let (sigma, mu) = match &rules.mode {
        ForecastMode::PlugIn => plug_in(kind, &p, origin, &xi)?,
        ForecastMode::MonteCarlo { draws, seed } => monte_carlo(kind, &p, origin, &xi, *draws, *seed)?,
    };
    let (x_rule, delta_rule) = rules.describe();
    Ok(ForecastPath {
        kind,
        origin: origin.index,
        horizon,
        mu,
        sigma,
        xi,
        x_rule,
        delta_rule,
        x_shock: rules.x_shock,
        mode: rules.mode.clone(),
        unconditional_mean: limit,
    })
}

fn plug_in(kind: ModelKind, p: &ParamSet, o: &ForecastOrigin, xi: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let a = p.alpha + 0.5 * p.gamma;
    let mut sigma = Vec::with_capacity(xi.len());
    let mut mu: Vec<f64> = Vec::with_capacity(xi.len());
    let mut s = p.omega + p.alpha * o.rv + p.beta * o.sigma + p.gamma * o.neg * o.rv;
    for (h, &x) in xi.iter().enumerate() {
        if h > 0 {
            s = p.omega + a * mu[h - 1] + p.beta * s;
        }
        let m = compose(kind, s, x);
        if !(m > 0.0 && m.is_finite()) {
            return Err(invalid_step(kind, h + 1, m));
        }
        sigma.push(s);
        mu.push(m);
    }
    Ok((sigma, mu))
}

const MC_CHUNK: usize = 256;

fn monte_carlo(
    kind: ModelKind,
    p: &ParamSet,
    o: &ForecastOrigin,
    xi: &[f64],
    draws: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if draws == 0 {
        return Err(Error::arg("Monte Carlo forecasts need at least one draw"));
    }
    let horizon = xi.len();
    let s1 = p.omega + p.alpha * o.rv + p.beta * o.sigma + p.gamma * o.neg * o.rv;
    let one_chunk = |c: usize| -> std::result::Result<(Vec<f64>, Vec<f64>), (usize, f64)> {
        let mut ss = vec![0.0; horizon];
        let mut sm = vec![0.0; horizon];
        for d in c * MC_CHUNK..((c + 1) * MC_CHUNK).min(draws) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(d as u64);
            let mut s = s1;
            for h in 0..horizon {
                let m = compose(kind, s, xi[h]);
                if !(m > 0.0 && m.is_finite()) {
                    return Err((h + 1, m));
                }
                ss[h] += s;
                sm[h] += m;
                let rv = m * gamma_draw(p.theta, &mut rng);
                let neg = if rng.random::<bool>() { 1.0 } else { 0.0 };
                s = p.omega + p.alpha * rv + p.beta * s + p.gamma * neg * rv;
            }
        }
        Ok((ss, sm))
    };
    let chunks = draws.div_ceil(MC_CHUNK);
    let parts: Vec<_> = (0..chunks).into_par_iter().map(one_chunk).collect();
    let mut sigma = vec![0.0; horizon];
    let mut mu = vec![0.0; horizon];
    for part in parts {
        let (ss, sm) = part.map_err(|(h, m)| invalid_step(kind, h, m))?;
        for h in 0..horizon {
            sigma[h] += ss[h];
            mu[h] += sm[h];
        }
    }
    let n = draws as f64;
    sigma.iter_mut().for_each(|v| *v /= n);
    mu.iter_mut().for_each(|v| *v /= n);
    Ok((sigma, mu))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrfPath {
    pub shock: f64,
    pub baseline: ForecastPath,
    pub shocked: ForecastPath,
    /// `shocked - baseline` per step.
    pub diff: Vec<f64>,
}

impl IrfPath {
    /// Step and value of the largest absolute difference.
    pub fn peak(&self) -> (usize, f64) {
        self.diff
            .iter()
            .enumerate()
            .fold((1, 0.0), |acc, (h, &d)| if d.abs() > acc.1.abs() { (h + 1, d) } else { acc })
    }

    /// CSV with columns `step, baseline, shocked, diff`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["step", "baseline", "shocked", "diff"])?;
        for h in 0..self.diff.len() {
            w.write_record([
                (h + 1).to_string(),
                self.baseline.mu[h].to_string(),
                self.shocked.mu[h].to_string(),
                self.diff[h].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Baseline versus a sustained shift of the proxy by `shock`.
pub fn impulse_response(
    kind: ModelKind,
    p: &ParamSet,
    origin: &ForecastOrigin,
    rules: &ForecastRules,
    horizon: usize,
    shock: f64,
) -> Result<IrfPath> {
    if !shock.is_finite() {
        return Err(Error::arg("shock must be finite"));
    }
    let baseline = multi_step_forecast(kind, p, origin, rules, horizon)?;
    let shocked_rules = ForecastRules { x_shock: rules.x_shock + shock, ..rules.clone() };
    let shocked = multi_step_forecast(kind, p, origin, &shocked_rules, horizon)?;
    let diff = shocked.mu.iter().zip(&baseline.mu).map(|(s, b)| s - b).collect();
    Ok(IrfPath { shock, baseline, shocked, diff })
}

/// Sample standard deviation of the proxy over `window`.
pub fn default_shock(x: &[f64], window: Range<usize>) -> Result<f64> {
    if window.end > x.len() || window.end < window.start + 2 {
        return Err(Error::arg("shock window needs at least two observations"));
    }
    let v = &x[window];
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    Ok((v.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolicyVariable {
    #[serde(rename = "x")]
    Proxy,
    #[serde(rename = "delta")]
    Announcement,
}

impl PolicyVariable {
    pub fn name(self) -> &'static str {
        match self {
            PolicyVariable::Proxy => "x",
            PolicyVariable::Announcement => "delta",
        }
    }
}

impl std::str::FromStr for PolicyVariable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" | "proxy" => Ok(PolicyVariable::Proxy),
            "delta" | "d" | "announcement" => Ok(PolicyVariable::Announcement),
            _ => Err(Error::arg(format!("unknown policy variable `{s}` (x or delta)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalEffect {
    pub kind: ModelKind,
    pub variable: PolicyVariable,
    /// `delta` for the proxy, `phi` for announcements.
    pub kappa: f64,
    pub tau: usize,
    /// The constant effect, or the average of `series` over the averaging days.
    pub value: f64,
    /// Per-day effect on `mu_s` for state-dependent kinds; NaN outside the window.
    pub series: Option<Vec<f64>>,
    /// Number of days entering the average.
    pub days: usize,
}

/// Effect on `mu_{t+tau}` of `x_{t-1}` or `Delta_t`. State-dependent kinds
/// evaluate it at the filtered state of each day `s = t + tau` in `range`;
/// announcement effects average only days with `Delta_{s-tau} = 1`.
pub fn marginal_effects(
    kind: ModelKind,
    p: &ParamSet,
    f: &FilterOutput,
    inp: &ModelInputs,
    variable: PolicyVariable,
    tau: usize,
    range: Range<usize>,
) -> Result<MarginalEffect> {
    if !kind.has_policy() {
        return Err(Error::arg(format!("{kind} has no policy component")));
    }
    let kappa = match variable {
        PolicyVariable::Proxy => p.delta,
        PolicyVariable::Announcement => p.phi,
    };
    let decay = match kind {
        ModelKind::Xmap => p.beta,
        _ => p.psi,
    };
    let base = kappa * decay.powi(tau as i32);
    if matches!(kind, ModelKind::Map | ModelKind::Xmap) {
        return Ok(MarginalEffect { kind, variable, kappa, tau, value: base, series: None, days: 0 });
    }
    if !f.valid {
        return Err(Error::Precondition("marginal effects need a valid filter output".into()));
    }
    if range.start >= range.end || range.end > f.mu.len() {
        return Err(Error::arg(format!("range {range:?} empty or out of bounds")));
    }
    let mut series = vec![f64::NAN; f.mu.len()];
    let (mut sum, mut days) = (0.0, 0usize);
    for s in range.start.max(tau)..range.end {
        let v = match kind {
            ModelKind::Lmap => {
                let l = logistic(f.xi[s]);
                2.0 * f.sigma[s] * base * l * (1.0 - l)
            }
            _ => base * f.sigma[s],
        };
        series[s] = v;
        let counts = match variable {
            PolicyVariable::Proxy => true,
            PolicyVariable::Announcement => inp.delta[s - tau] == 1,
        };
        if counts {
            sum += v;
            days += 1;
        }
    }
    if days == 0 {
        return Err(Error::Precondition(format!(
            "no {} days in the window, average undefined",
            if variable == PolicyVariable::Announcement { "announcement" } else { "usable" }
        )));
    }
    Ok(MarginalEffect { kind, variable, kappa, tau, value: sum / days as f64, series: Some(series), days })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn origin(sigma: f64, xi: f64) -> ForecastOrigin {
        ForecastOrigin { index: 0, sigma, xi, rv: sigma + xi, neg: 0.5, xc: 0.0, x_bar: 0.0, delta_bar: 0.0 }
    }

    fn xmap() -> ParamSet {
        ParamSet { omega: 0.1, alpha: 0.2, beta: 0.5, gamma: 0.1, delta: 0.0, phi: 0.0, psi: 0.0, theta: 5.0 }
    }

    #[test]
    fn hand_recursion_second_step() {
        // origin state chosen so that the first forecast is 0.6
        let o = ForecastOrigin { index: 0, sigma: 0.4, xi: 0.0, rv: 1.0, neg: 1.0, xc: 0.0, x_bar: 0.0, delta_bar: 0.0 };
        let path = multi_step_forecast(ModelKind::Xmap, &xmap(), &o, &ForecastRules::default(), 200).unwrap();
        assert!((path.mu[0] - 0.6).abs() < 1e-15);
        assert!((path.mu[1] - 0.55).abs() < 1e-15);
        assert!((path.mu[199] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn flat_at_fixed_point() {
        let p = xmap();
        let m = unconditional_mean(ModelKind::Amem, &p).unwrap();
        let o = ForecastOrigin { rv: m, neg: 0.5, ..origin(m, 0.0) };
        let path = multi_step_forecast(ModelKind::Amem, &p, &o, &ForecastRules::default(), 50).unwrap();
        assert!(path.mu.iter().all(|v| (v - m).abs() < 1e-14));
        assert_eq!(path.convergence(0.01, ConvergenceRule::SuccessiveDifference).unwrap().horizon, Some(1));
    }

    #[test]
    fn geometric_path_horizons() {
        let mu: Vec<f64> = (1..=200).map(|h| 0.4 + 0.2 * 0.9f64.powi(h)).collect();
        assert_eq!(convergence_horizon(&mu, 0.01, ConvergenceRule::SuccessiveDifference, 0.4).unwrap(), Some(7));
        assert_eq!(convergence_horizon(&mu, 0.01, ConvergenceRule::DistanceToLimit, 0.4).unwrap(), Some(29));
        assert_eq!(convergence_horizon(&mu, 0.0, ConvergenceRule::SuccessiveDifference, 0.4).unwrap(), None);
        assert!(convergence_horizon(&mu[..1], 0.01, ConvergenceRule::SuccessiveDifference, 0.4).is_err());
    }

    #[test]
    fn horizon_limits() {
        let o = origin(0.4, 0.0);
        assert!(multi_step_forecast(ModelKind::Amem, &xmap(), &o, &ForecastRules::default(), 751).is_err());
        assert!(multi_step_forecast(ModelKind::Amem, &xmap(), &o, &ForecastRules::default(), 0).is_err());
        let one = multi_step_forecast(ModelKind::Amem, &xmap(), &o, &ForecastRules::default(), 1).unwrap();
        assert_eq!(one.mu.len(), 1);
    }

    #[test]
    fn map_irf_is_cumulated_delta() {
        let p = ParamSet { delta: -0.5, psi: 0.2, ..xmap() };
        let o = origin(0.4, 0.0);
        let irf = impulse_response(ModelKind::Map, &p, &o, &ForecastRules::default(), 40, 0.1).unwrap();
        assert!(irf.diff.iter().all(|d| *d < 0.0));
        assert!((irf.diff[0] - (-0.05)).abs() < 1e-14);
        let double = impulse_response(ModelKind::Map, &p, &o, &ForecastRules::default(), 40, 0.2).unwrap();
        for (a, b) in irf.diff.iter().zip(&double.diff) {
            assert!((2.0 * a - b).abs() < 1e-10);
        }
        let flat = impulse_response(ModelKind::Map, &ParamSet { delta: 0.0, ..p }, &o, &ForecastRules::default(), 40, 0.1).unwrap();
        assert!(flat.diff.iter().all(|d| *d == 0.0));
    }

    #[test]
    fn monte_carlo_agrees_with_plug_in() {
        let p = ParamSet { omega: 1.0, alpha: 0.15, beta: 0.7, gamma: 0.1, delta: -0.5, phi: 0.5, psi: 0.3, theta: 8.0 };
        let o = ForecastOrigin { index: 0, sigma: 8.0, xi: 0.2, rv: 9.0, neg: 1.0, xc: 0.1, x_bar: 0.3, delta_bar: 0.05 };
        for kind in [ModelKind::Map, ModelKind::Lmap] {
            let plug = multi_step_forecast(kind, &p, &o, &ForecastRules::default(), 30).unwrap();
            let rules = ForecastRules { mode: ForecastMode::MonteCarlo { draws: 20_000, seed: 1 }, ..Default::default() };
            let mc = multi_step_forecast(kind, &p, &o, &rules, 30).unwrap();
            for h in 0..30 {
                assert!((plug.mu[h] - mc.mu[h]).abs() / plug.mu[h] < 0.01, "{kind} {h}");
            }
        }
    }

    #[test]
    fn calendar_announcement_lifts_path() {
        let p = ParamSet { phi: 1.0, psi: 0.3, ..xmap() };
        let o = origin(0.4, 0.0);
        let rules = ForecastRules { delta: DeltaForecastRule::Calendar(vec![0, 0, 1]), ..Default::default() };
        let with = multi_step_forecast(ModelKind::Map, &p, &o, &rules, 10).unwrap();
        let without = multi_step_forecast(ModelKind::Map, &p, &o, &ForecastRules::default(), 10).unwrap();
        assert_eq!(with.mu[1], without.mu[1]);
        assert!((with.mu[2] - without.mu[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn constant_marginal_effects() {
        let p = ParamSet { delta: -0.636, beta: 0.689, psi: 0.1, ..xmap() };
        let f = FilterOutput { kind: ModelKind::Xmap, sigma: vec![], xi: vec![], mu: vec![], eps: vec![], valid: true, invalid_at: None };
        let inp = ModelInputs {
            rv: vec![],
            neg: vec![],
            delta: vec![],
            xc: vec![],
            dc: vec![],
            x_bar: 0.0,
            delta_bar: 0.0,
            init_level: 1.0,
            window: 0..0,
        };
        let me = marginal_effects(ModelKind::Xmap, &p, &f, &inp, PolicyVariable::Proxy, 1, 0..0).unwrap();
        assert!((me.value - (-0.438204)).abs() < 1e-12);
        let me = marginal_effects(ModelKind::Map, &ParamSet { delta: -1.836, ..p }, &f, &inp, PolicyVariable::Proxy, 0, 0..0).unwrap();
        assert_eq!(me.value, -1.836);
        assert!(marginal_effects(ModelKind::Amem, &p, &f, &inp, PolicyVariable::Proxy, 0, 0..0).is_err());
    }

    #[test]
    fn lmap_effect_at_zero_state() {
        let n = 5;
        let p = ParamSet { delta: 0.8, psi: 0.4, ..xmap() };
        let f = FilterOutput {
            kind: ModelKind::Lmap,
            sigma: vec![3.0; n],
            xi: vec![0.0; n],
            mu: vec![3.0; n],
            eps: vec![1.0; n],
            valid: true,
            invalid_at: None,
        };
        let inp = ModelInputs {
            rv: vec![3.0; n],
            neg: vec![0.0; n],
            delta: vec![0, 0, 0, 0, 0],
            xc: vec![0.0; n],
            dc: vec![0.0; n],
            x_bar: 0.0,
            delta_bar: 0.0,
            init_level: 3.0,
            window: 0..n,
        };
        let me = marginal_effects(ModelKind::Lmap, &p, &f, &inp, PolicyVariable::Proxy, 1, 0..n).unwrap();
        assert!((me.value - 3.0 * 0.8 * 0.4 / 2.0).abs() < 1e-14);
        assert_eq!(me.days, 4);
        assert!(marginal_effects(ModelKind::Lmap, &p, &f, &inp, PolicyVariable::Announcement, 0, 0..n).is_err());
    }

    #[test]
    fn default_shock_is_sample_sd() {
        let sd = default_shock(&[0.1, 0.2, 0.3, 0.4], 0..4).unwrap();
        assert!((sd - 0.12909944487358055).abs() < 1e-15);
    }
}
