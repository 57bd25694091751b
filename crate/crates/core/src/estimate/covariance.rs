//! Sandwich (QML-robust) covariance from numerical derivatives.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::optim::fd_step;

#[derive(Debug, Clone)]
pub struct Covariance {
    /// `A^-1 B A^-1 / T` with `A` minus the Hessian of the mean log-likelihood
    /// and `B` the mean outer product of per-observation scores.
    pub robust: DMatrix<f64>,
    /// `A^-1 / T`.
    pub hessian: DMatrix<f64>,
    pub gradient: Vec<f64>,
    pub nobs: usize,
}

impl Covariance {
    pub fn robust_se(&self) -> Vec<f64> {
        self.robust.diagonal().iter().map(|v| v.sqrt()).collect()
    }

    pub fn hessian_se(&self) -> Vec<f64> {
        self.hessian.diagonal().iter().map(|v| v.sqrt()).collect()
    }
}

/// Robust covariance of the maximizer of `sum_t l_t(theta)`.
///
/// `per_obs` returns the per-observation contributions, or `None` at an
/// infeasible point. `theta` must be an interior optimum: the max-norm of the
/// mean-score must not exceed `grad_tol`.
pub fn sandwich<F>(per_obs: F, theta: &[f64], names: &[&str], grad_tol: f64) -> Result<Covariance>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let k = theta.len();
    let infeasible = || Error::Precondition("log-likelihood infeasible near the estimate".into());
    let base = per_obs(theta).ok_or_else(infeasible)?;
    let nobs = base.len();
    if nobs == 0 {
        return Err(Error::arg("no observations"));
    }
    let tn = nobs as f64;
    let h: Vec<f64> = theta.iter().map(|&v| fd_step(v)).collect();

    let shifted = |moves: &[(usize, f64)]| -> Result<Vec<f64>> {
        let mut th = theta.to_vec();
        for &(i, s) in moves {
            th[i] += s;
        }
        per_obs(&th).ok_or_else(infeasible)
    };
    // Differences are formed per observation before averaging, which keeps
    // the rounding error of large sums out of the second differences.
    let mean_of = |f: &dyn Fn(usize) -> f64| (0..nobs).map(f).sum::<f64>() / tn;

    let mut scores = DMatrix::<f64>::zeros(nobs, k);
    let mut gradient = vec![0.0; k];
    let mut hess = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        let up = shifted(&[(i, h[i])])?;
        let dn = shifted(&[(i, -h[i])])?;
        for t in 0..nobs {
            scores[(t, i)] = (up[t] - dn[t]) / (2.0 * h[i]);
        }
        gradient[i] = mean_of(&|t| scores[(t, i)]);
        hess[(i, i)] = mean_of(&|t| (up[t] - 2.0 * base[t] + dn[t]) / (h[i] * h[i]));
    }
    let gmax = gradient.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    if !(gmax <= grad_tol) {
        return Err(Error::Precondition(format!(
            "not an interior optimum: score max-norm {gmax:.3e} exceeds {grad_tol:.1e}"
        )));
    }

    for i in 0..k {
        for j in 0..i {
            let pp = shifted(&[(i, h[i]), (j, h[j])])?;
            let pm = shifted(&[(i, h[i]), (j, -h[j])])?;
            let mp = shifted(&[(i, -h[i]), (j, h[j])])?;
            let mm = shifted(&[(i, -h[i]), (j, -h[j])])?;
            let v = mean_of(&|t| (pp[t] - pm[t] - mp[t] + mm[t]) / (4.0 * h[i] * h[j]));
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }

    let a = -hess;
    let eig = SymmetricEigen::new(a.clone());
    let (imin, lmin) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("non-empty");
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(lmin > 1e-10 * lmax) {
        let v = eig.eigenvectors.column(imin);
        let worst = (0..k).max_by(|&x, &y| v[x].abs().total_cmp(&v[y].abs())).unwrap_or(0);
        let name = names.get(worst).copied().unwrap_or("?");
        return Err(Error::SingularHessian(name.to_string()));
    }
    let inv_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l));
    let a_inv = &eig.eigenvectors * inv_diag * eig.eigenvectors.transpose();
    let b = scores.transpose() * &scores / tn;
    let robust = &a_inv * b * &a_inv / tn;
    let hessian = a_inv / tn;
    Ok(Covariance { robust, hessian, gradient, nobs })
}
