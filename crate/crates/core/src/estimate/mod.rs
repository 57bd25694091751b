//! Gamma quasi-maximum-likelihood estimation.
//!
//! The conditional mean is fitted by maximizing the Gamma(theta, 1/theta)
//! log-likelihood of `rv_t / mu_t`. Constraints are imposed through the
//! reparameterization in [`transform`], and standard errors come from the
//! sandwich in [`covariance`].

pub mod covariance;
pub mod diagnostics;
pub mod transform;

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::data::PanelSeries;
use crate::error::{Error, Result};
use crate::evaluate::{losses, LossKind};
use crate::model::{filter, run_recursion, FilterOutput, ModelInputs, ModelKind, Param, ParamSet};
use crate::optim::{bfgs, nelder_mead, Method, OptimOptions, OptimResult};

pub use covariance::{sandwich, Covariance};
pub use diagnostics::{information_criteria, ljung_box, LjungBox};
pub use transform::Transform;

/// Log-density of `rv` under a Gamma with shape `theta` and mean `mu`.
#[inline]
pub fn gamma_log_density(theta: f64, mu: f64, rv: f64) -> f64 {
    theta * theta.ln() - ln_gamma(theta) + (theta - 1.0) * rv.ln() - theta * mu.ln() - theta * rv / mu
}

/// Per-observation contributions over `range`. Empty when the filter output
/// is invalid or `theta` is not positive.
pub fn gamma_loglik_terms(f: &FilterOutput, theta: f64, rv: &[f64], range: Range<usize>) -> Option<Vec<f64>> {
    if !f.valid || !(theta > 0.0) {
        return None;
    }
    let c = theta * theta.ln() - ln_gamma(theta);
    Some(range.map(|t| c + (theta - 1.0) * rv[t].ln() - theta * f.mu[t].ln() - theta * rv[t] / f.mu[t]).collect())
}

/// Gamma quasi-log-likelihood summed over the estimation window (its first
/// row excluded when it is the start-up row). `-inf` for an invalid filter.
pub fn gamma_loglik(f: &FilterOutput, theta: f64, inp: &ModelInputs) -> f64 {
    gamma_loglik_terms(f, theta, &inp.rv, inp.likelihood_range()).map_or(f64::NEG_INFINITY, |v| v.iter().sum())
}

/// Allocation-free log-likelihood used inside the optimizer.
pub fn loglik(kind: ModelKind, p: &ParamSet, inp: &ModelInputs, sum_ln_rv: f64) -> f64 {
    let theta = p.theta;
    if !(theta > 0.0) {
        return f64::NEG_INFINITY;
    }
    let range = inp.likelihood_range();
    let mut acc = 0.0;
    let ok = run_recursion(kind, p, inp, |t, _, _, m| {
        if t >= range.start && t < range.end {
            acc += m.ln() + inp.rv[t] / m;
        }
    });
    if ok.is_err() {
        return f64::NEG_INFINITY;
    }
    let n = (range.end - range.start) as f64;
    n * (theta * theta.ln() - ln_gamma(theta)) + (theta - 1.0) * sum_ln_rv - theta * acc
}

fn sum_ln_rv(inp: &ModelInputs) -> f64 {
    inp.rv[inp.likelihood_range()].iter().map(|r| r.ln()).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub starts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub grad_tol: f64,
    /// Max-norm of the natural-parameter score accepted as an interior optimum.
    pub se_grad_tol: f64,
    pub psi_below_beta: bool,
    pub min_window: usize,
    pub lb_lags: Vec<usize>,
    pub parallel: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            starts: 5,
            seed: 0,
            max_iter: 500,
            grad_tol: 1e-6,
            se_grad_tol: 1e-3,
            psi_below_beta: true,
            min_window: 50,
            lb_lags: vec![1, 5, 10],
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamEstimate {
    pub param: Param,
    pub value: f64,
    pub robust_se: Option<f64>,
    pub hessian_se: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub method: String,
    pub start: usize,
    pub iterations: usize,
    pub evaluations: usize,
    pub grad_norm: f64,
    pub converged: bool,
    pub constraints_ok: bool,
    pub starts_converged: usize,
    /// Why standard errors are missing, if they are.
    pub se_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub kind: ModelKind,
    pub params: ParamSet,
    pub estimates: Vec<ParamEstimate>,
    pub loglik: f64,
    pub nobs: usize,
    pub n_params: usize,
    pub aic: f64,
    pub bic: f64,
    /// In-sample mean losses of `mu_t` against `rv_t`.
    pub mse: f64,
    pub qlike: f64,
    pub persistence: f64,
    pub ljung_box: Vec<LjungBox>,
    pub window: Range<usize>,
    pub convergence: ConvergenceReport,
}

impl EstimationResult {
    pub fn estimate(&self, p: Param) -> Option<&ParamEstimate> {
        self.estimates.iter().find(|e| e.param == p)
    }

    pub fn robust_se(&self) -> Option<Vec<f64>> {
        self.estimates.iter().map(|e| e.robust_se).collect()
    }
}

/// Moment-based start: `omega = mean * (1 - 0.9)`, `alpha = .15`, `beta = .7`,
/// `gamma = .05`, zero policy effects, `psi = beta / 10`, `theta` from the
/// dispersion of the implied residuals.
pub fn starting_values(kind: ModelKind, inp: &ModelInputs) -> ParamSet {
    let mean = inp.init_level;
    let mut p = ParamSet { omega: mean * 0.1, alpha: 0.15, beta: 0.7, gamma: 0.05, delta: 0.0, phi: 0.0, psi: 0.07, theta: 1.0 }
        .restrict(kind);
    let f = filter(kind, &p, inp);
    let r = inp.likelihood_range();
    let eps = &f.eps[r.clone()];
    let n = eps.len() as f64;
    let m = eps.iter().sum::<f64>() / n;
    let v = eps.iter().map(|e| (e - m) * (e - m)).sum::<f64>() / n;
    p.theta = if f.valid && v > 0.0 { (m * m / v).clamp(0.5, 200.0) } else { 5.0 };
    p
}

fn run_start(obj: &(dyn Fn(&[f64]) -> f64 + Sync), u0: &[f64], opts: &FitOptions) -> OptimResult {
    let oo = OptimOptions { max_iter: opts.max_iter, grad_tol: opts.grad_tol, f_tol: 1e-13 };
    let mut r = bfgs(obj, u0, &oo);
    if !r.converged && r.f.is_finite() {
        let nm = nelder_mead(obj, &r.x, 0.1, &OptimOptions { max_iter: 200 * u0.len(), ..oo });
        let polished = bfgs(obj, &nm.x, &oo);
        let evaluations = r.evaluations + nm.evaluations + polished.evaluations;
        let iterations = r.iterations + nm.iterations + polished.iterations;
        r = OptimResult { evaluations, iterations, method: Method::NelderMead, ..polished };
    }
    r
}

/// Fits `kind` on the window of `inp` with multi-start quasi-Newton search.
pub fn fit(kind: ModelKind, inp: &ModelInputs, opts: &FitOptions) -> Result<EstimationResult> {
    let w = inp.likelihood_range();
    if w.end > inp.len() || w.end <= w.start || w.end - w.start < opts.min_window {
        return Err(Error::arg(format!(
            "estimation window {:?} shorter than the minimum {} observations",
            inp.window, opts.min_window
        )));
    }
    let tr = Transform { kind, psi_below_beta: opts.psi_below_beta };
    let slr = sum_ln_rv(inp);
    let nobs = (w.end - w.start) as f64;
    let obj = |u: &[f64]| -> f64 {
        let p = tr.to_natural(u);
        -loglik(kind, &p, inp, slr) / nobs
    };

    let base = tr.to_unconstrained(&starting_values(kind, inp))?;
    let starts: Vec<Vec<f64>> = (0..opts.starts.max(1))
        .map(|k| {
            if k == 0 {
                return base.clone();
            }
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(k as u64);
            base.iter()
                .map(|&u| {
                    let z: f64 = rng.sample(StandardNormal);
                    u + 0.5 * z
                })
                .collect()
        })
        .collect();

    let results: Vec<OptimResult> = if opts.parallel {
        starts.par_iter().map(|u0| run_start(&obj, u0, opts)).collect()
    } else {
        starts.iter().map(|u0| run_start(&obj, u0, opts)).collect()
    };
    let starts_converged = results.iter().filter(|r| r.converged).count();
    let (best_idx, best) = results
        .iter()
        .enumerate()
        .filter(|(_, r)| r.f.is_finite())
        .min_by(|a, b| a.1.f.total_cmp(&b.1.f).then(a.0.cmp(&b.0)))
        .ok_or_else(|| Error::Optimizer("no starting point produced a feasible likelihood".into()))?;
    if !best.converged {
        return Err(Error::Optimizer(format!(
            "{kind}: no convergence after {} iterations (gradient norm {:.3e})",
            best.iterations, best.grad_norm
        )));
    }

    let params = tr.to_natural(&best.x);
    let constraints_ok = params.check_constraints(kind).is_ok() || (!opts.psi_below_beta && params.persistence() < 1.0);
    summarize(kind, params, inp, opts, |se_error| ConvergenceReport {
        method: match best.method {
            Method::Bfgs => "bfgs".into(),
            Method::NelderMead => "nelder-mead+bfgs".into(),
        },
        start: best_idx,
        iterations: best.iterations,
        evaluations: best.evaluations,
        grad_norm: best.grad_norm,
        converged: best.converged,
        constraints_ok,
        starts_converged,
        se_error,
    })
}

/// Fits on `window` of a panel, centering and starting up on that window.
pub fn fit_panel(kind: ModelKind, p: &PanelSeries, window: Range<usize>, opts: &FitOptions) -> Result<EstimationResult> {
    let inp = ModelInputs::new(p, window)?;
    fit(kind, &inp, opts)
}

/// Robust standard errors of the free parameters at an interior optimum.
pub fn robust_se(kind: ModelKind, params: &ParamSet, inp: &ModelInputs, grad_tol: f64) -> Result<Covariance> {
    let names: Vec<&str> = kind.free_params().iter().map(|p| p.name()).collect();
    let range = inp.likelihood_range();
    let per_obs = |th: &[f64]| {
        let p = ParamSet::from_free(kind, th);
        let f = filter(kind, &p, inp);
        gamma_loglik_terms(&f, p.theta, &inp.rv, range.clone())
    };
    sandwich(per_obs, &params.free_values(kind), &names, grad_tol)
}

fn summarize(
    kind: ModelKind,
    params: ParamSet,
    inp: &ModelInputs,
    opts: &FitOptions,
    report: impl FnOnce(Option<String>) -> ConvergenceReport,
) -> Result<EstimationResult> {
    let f = filter(kind, &params, inp).into_result()?;
    let range = inp.likelihood_range();
    let ll = gamma_loglik(&f, params.theta, inp);
    let nobs = range.end - range.start;
    let k = kind.n_free();
    let (aic, bic) = information_criteria(ll, nobs, k);
    let rv = &inp.rv[range.clone()];
    let mu = &f.mu[range.clone()];
    let mean = |v: Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    let mse = mean(losses(mu, rv, LossKind::Mse)?);
    let qlike = mean(losses(mu, rv, LossKind::QLike)?);
    let lb = ljung_box(&f.eps[range], &opts.lb_lags)?;

    let (cov, se_error) = match robust_se(kind, &params, inp, opts.se_grad_tol) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let estimates = kind
        .free_params()
        .iter()
        .enumerate()
        .map(|(i, &param)| ParamEstimate {
            param,
            value: params.get(param),
            robust_se: cov.as_ref().map(|c| c.robust[(i, i)].sqrt()).filter(|v| v.is_finite()),
            hessian_se: cov.as_ref().map(|c| c.hessian[(i, i)].sqrt()).filter(|v| v.is_finite()),
        })
        .collect();
    Ok(EstimationResult {
        kind,
        params,
        estimates,
        loglik: ll,
        nobs,
        n_params: k,
        aic,
        bic,
        mse,
        qlike,
        persistence: params.persistence(),
        ljung_box: lb,
        window: inp.window.clone(),
        convergence: report(se_error),
    })
}
