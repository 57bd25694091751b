//! Data-generating processes for every model kind.

use chrono::{Datelike, Days, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::PanelSeries;
use crate::error::{Error, Result};
use crate::model::{compose, initial_xi, unconditional_mean, FilterOutput, ModelInputs, ModelKind, ParamSet, PolicyCoefs};

/// Path of the policy proxy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XRule {
    Constant(f64),
    /// Gaussian steps with drift, reflected into `[0, 1]`.
    RandomWalk { start: f64, drift: f64, sd: f64 },
    User(Vec<f64>),
}

impl Default for XRule {
    fn default() -> Self {
        XRule::RandomWalk { start: 0.2, drift: 0.0, sd: 0.002 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AnnouncementRule {
    #[default]
    None,
    /// An announcement every `k` days, starting at day `k - 1`.
    Every(usize),
    /// Zero-based day indices carrying an announcement.
    Calendar(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    pub kind: ModelKind,
    pub params: ParamSet,
    pub t_len: usize,
    pub x: XRule,
    pub announcements: AnnouncementRule,
    pub seed: u64,
    pub start_date: NaiveDate,
}

impl SimScenario {
    /// Random-walk proxy, an announcement every 20 days, business-day dates
    /// from 2005-01-03.
    pub fn new(kind: ModelKind, params: ParamSet, t_len: usize, seed: u64) -> Self {
        Self {
            kind,
            params,
            t_len,
            x: XRule::default(),
            announcements: AnnouncementRule::Every(20),
            seed,
            start_date: NaiveDate::from_ymd_opt(2005, 1, 3).expect("valid date"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub panel: PanelSeries,
    /// True states; the generator starts from the unconditional mean.
    pub truth: FilterOutput,
    /// Inputs that make `filter` reproduce `truth` exactly.
    pub inputs: ModelInputs,
}

/// Unit-mean Gamma variate with shape `theta` (variance `1/theta`).
pub fn gamma_draw<R: Rng + ?Sized>(theta: f64, rng: &mut R) -> f64 {
    Gamma::new(theta, 1.0 / theta).expect("positive finite shape").sample(rng)
}

/// `n` consecutive weekdays starting at the first weekday on or after `start`.
pub fn business_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

fn x_path(rule: &XRule, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    match rule {
        XRule::Constant(c) => {
            if !(0.0..=1.0).contains(c) {
                return Err(Error::arg(format!("constant proxy {c} outside [0, 1]")));
            }
            Ok(vec![*c; n])
        }
        XRule::RandomWalk { start, drift, sd } => {
            if !(0.0..=1.0).contains(start) || !(*sd >= 0.0) {
                return Err(Error::arg("random walk needs a start in [0, 1] and sd >= 0"));
            }
            let mut v = *start;
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                out.push(v);
                let z: f64 = rng.sample(StandardNormal);
                v += drift + sd * z;
                while !(0.0..=1.0).contains(&v) {
                    v = if v < 0.0 { -v } else { 2.0 - v };
                }
            }
            Ok(out)
        }
        XRule::User(path) => {
            if path.len() != n {
                return Err(Error::arg(format!("user proxy path has {} values, need {n}", path.len())));
            }
            if path.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::arg("user proxy path leaves [0, 1]"));
            }
            Ok(path.clone())
        }
    }
}

fn announcement_path(rule: &AnnouncementRule, n: usize) -> Result<Vec<u8>> {
    let mut d = vec![0u8; n];
    match rule {
        AnnouncementRule::None => {}
        AnnouncementRule::Every(k) => {
            if *k == 0 {
                return Err(Error::arg("announcement spacing must be positive"));
            }
            for t in (k - 1..n).step_by(*k) {
                d[t] = 1;
            }
        }
        AnnouncementRule::Calendar(days) => {
            for &t in days {
                if t >= n {
                    return Err(Error::arg(format!("announcement day {t} beyond sample length {n}")));
                }
                d[t] = 1;
            }
        }
    }
    Ok(d)
}

/// Generates a panel from the exact model recursion with Gamma innovations.
/// Covariates are centered on their full-sample means.
pub fn simulate_panel(s: &SimScenario) -> Result<SimOutput> {
    let n = s.t_len;
    if n < 2 {
        return Err(Error::arg("simulated panel needs at least 2 days"));
    }
    let p = s.params.restrict(s.kind);
    p.check_hard_bounds()?;
    p.check_constraints(s.kind)?;
    let level = unconditional_mean(s.kind, &p)?;

    // independent streams: innovations, signs, proxy
    let stream = |k: u64| {
        let mut r = ChaCha8Rng::seed_from_u64(s.seed);
        r.set_stream(k);
        r
    };
    let mut eps_rng = stream(0);
    let mut sign_rng = stream(1);
    let mut x_rng = stream(2);

    let x = x_path(&s.x, n, &mut x_rng)?;
    let delta = announcement_path(&s.announcements, n)?;
    let mut ret = Vec::with_capacity(n);
    let mut neg = Vec::with_capacity(n);
    for _ in 0..n {
        let down = sign_rng.random::<bool>();
        let z: f64 = sign_rng.sample(StandardNormal);
        let mag = 0.01 + z.abs();
        ret.push(if down { -mag } else { mag });
        neg.push(if down { 1.0 } else { 0.0 });
    }
    let x_bar = x.iter().sum::<f64>() / n as f64;
    let delta_bar = delta.iter().map(|&d| f64::from(d)).sum::<f64>() / n as f64;
    let xc: Vec<f64> = x.iter().map(|v| v - x_bar).collect();
    let dc: Vec<f64> = delta.iter().map(|&d| f64::from(d) - delta_bar).collect();

    let pc = PolicyCoefs::new(s.kind, &p);
    let mut sigma = Vec::with_capacity(n);
    let mut xi = Vec::with_capacity(n);
    let mut mu = Vec::with_capacity(n);
    let mut eps = Vec::with_capacity(n);
    let mut rv = Vec::with_capacity(n);
    let (mut st, mut xt) = (level, initial_xi(s.kind));
    for t in 0..n {
        if t > 0 {
            let r = rv[t - 1];
            st = p.omega + p.alpha * r + p.beta * st + p.gamma * neg[t - 1] * r;
            xt = pc.step(xc[t - 1], dc[t], xt);
        }
        let m = compose(s.kind, st, xt);
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidState {
                index: t,
                reason: format!(
                    "{} conditional mean {m} not positive during simulation; shrink the policy coefficients or change the covariate scenario",
                    s.kind
                ),
            });
        }
        let e = gamma_draw(p.theta, &mut eps_rng);
        sigma.push(st);
        xi.push(xt);
        mu.push(m);
        eps.push(e);
        rv.push(m * e);
    }
    if let Some(t) = rv.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::InvalidState { index: t, reason: "simulated volatility underflowed to zero".into() });
    }

    let dates = business_days(s.start_date, n);
    let panel = PanelSeries::new(dates, rv.clone(), ret, x, delta.clone())?;
    let inputs = ModelInputs { rv, neg, delta, xc, dc, x_bar, delta_bar, init_level: level, window: 0..n };
    let truth = FilterOutput { kind: s.kind, sigma, xi, mu, eps, valid: true, invalid_at: None };
    Ok(SimOutput { panel, truth, inputs })
}
