//! Residual diagnostics and information criteria.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LjungBox {
    pub lag: usize,
    pub statistic: f64,
    pub p_value: f64,
}

/// Ljung-Box portmanteau statistics `Q(m) = T(T+2) sum_j rho_j^2 / (T-j)`
/// with chi-square(m) p-values, one entry per requested lag.
pub fn ljung_box(eps: &[f64], lags: &[usize]) -> Result<Vec<LjungBox>> {
    let n = eps.len();
    let max_lag = lags.iter().copied().max().unwrap_or(0);
    if lags.contains(&0) {
        return Err(Error::arg("Ljung-Box lags must be positive"));
    }
    if n <= max_lag {
        return Err(Error::arg(format!("series of length {n} too short for lag {max_lag}")));
    }
    let mean = eps.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = eps.iter().map(|e| e - mean).collect();
    let denom: f64 = centered.iter().map(|c| c * c).sum();
    if !(denom > 0.0) {
        return Err(Error::arg("constant residual series, autocorrelation undefined"));
    }
    let nf = n as f64;
    let mut cum = Vec::with_capacity(max_lag + 1);
    cum.push(0.0);
    for j in 1..=max_lag {
        let rho = centered[j..].iter().zip(&centered).map(|(a, b)| a * b).sum::<f64>() / denom;
        cum.push(cum[j - 1] + rho * rho / (nf - j as f64));
    }
    lags.iter()
        .map(|&m| {
            let q = nf * (nf + 2.0) * cum[m];
            let chi = ChiSquared::new(m as f64).map_err(|e| Error::arg(e.to_string()))?;
            Ok(LjungBox { lag: m, statistic: q, p_value: chi.sf(q) })
        })
        .collect()
}

/// Per-observation AIC and BIC: `(-2 ll + 2k)/T` and `(-2 ll + k ln T)/T`.
pub fn information_criteria(loglik: f64, nobs: usize, k: usize) -> (f64, f64) {
    let t = nobs as f64;
    let k = k as f64;
    ((-2.0 * loglik + 2.0 * k) / t, (-2.0 * loglik + k * t.ln()) / t)
}
