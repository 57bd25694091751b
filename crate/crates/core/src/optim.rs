//! Unconstrained minimizers used by the estimator: BFGS with central
//! difference gradients and a Nelder-Mead fallback.
//!
//! Objectives signal an infeasible point by returning `+inf` (or NaN); both
//! methods treat such points as rejected trial steps.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimOptions {
    pub max_iter: usize,
    /// Convergence threshold on the max-norm of the gradient.
    pub grad_tol: f64,
    /// Relative function-change threshold for Nelder-Mead.
    pub f_tol: f64,
}

impl Default for OptimOptions {
    fn default() -> Self {
        Self { max_iter: 500, grad_tol: 1e-6, f_tol: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Bfgs,
    NelderMead,
}

#[derive(Debug, Clone)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub method: Method,
}

/// Central-difference step, `eps^(1/3) * max(|x|, 1)`.
#[inline]
pub fn fd_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

/// Central-difference gradient. Falls back to a one-sided difference when
/// one neighbour is infeasible; `None` if both are.
pub fn numerical_gradient<F>(f: &F, x: &[f64], fx: f64) -> Option<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let mut xp = x.to_vec();
    let mut g = vec![0.0; x.len()];
    for i in 0..x.len() {
        let h = fd_step(x[i]);
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        g[i] = match (fp.is_finite(), fm.is_finite()) {
            (true, true) => (fp - fm) / (2.0 * h),
            (true, false) => (fp - fx) / h,
            (false, true) => (fx - fm) / h,
            (false, false) => return None,
        };
    }
    Some(g)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// BFGS on the inverse Hessian with a backtracking Armijo line search.
pub fn bfgs<F>(f: F, x0: &[f64], opts: &OptimOptions) -> OptimResult
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0usize;
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut x = x0.to_vec();
    let mut fx = eval(&x, &mut evals);
    let fail = |x: Vec<f64>, fx: f64, evals: usize, it: usize| OptimResult {
        x,
        f: fx,
        grad_norm: f64::INFINITY,
        iterations: it,
        evaluations: evals,
        converged: false,
        method: Method::Bfgs,
    };
    if !fx.is_finite() {
        return fail(x, fx, evals, 0);
    }
    let grad = |x: &[f64], fx: f64, evals: &mut usize| {
        *evals += 2 * n;
        numerical_gradient(&f, x, fx)
    };
    let Some(mut g) = grad(&x, fx, &mut evals) else {
        return fail(x, fx, evals, 0);
    };
    let identity = |h: &mut Vec<f64>, scale: f64| {
        h.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            h[i * n + i] = scale;
        }
    };
    let mut h = vec![0.0; n * n];
    identity(&mut h, 1.0);
    let mut first = true;
    let mut stalls = 0;

    for it in 0..opts.max_iter {
        let gnorm = max_abs(&g);
        if gnorm < opts.grad_tol {
            return OptimResult { x, f: fx, grad_norm: gnorm, iterations: it, evaluations: evals, converged: true, method: Method::Bfgs };
        }
        let mut d: Vec<f64> = (0..n).map(|i| -dot(&h[i * n..(i + 1) * n], &g)).collect();
        let mut slope = dot(&g, &d);
        if slope >= 0.0 || !slope.is_finite() {
            identity(&mut h, 1.0);
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        // keep trial steps inside a sane neighbourhood of the current point
        let dmax = max_abs(&d);
        if dmax > 5.0 {
            let s = 5.0 / dmax;
            d.iter_mut().for_each(|v| *v *= s);
            slope *= s;
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xt: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            let ft = eval(&xt, &mut evals);
            if ft.is_finite() && ft <= fx + 1e-4 * step * slope {
                accepted = Some((xt, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fnew)) = accepted else {
            if !first {
                identity(&mut h, 1.0);
                first = true;
                continue;
            }
            let grad_norm = gnorm;
            return OptimResult { x, f: fx, grad_norm, iterations: it, evaluations: evals, converged: grad_norm < 1e3 * opts.grad_tol, method: Method::Bfgs };
        };
        let Some(gn) = grad(&xn, fnew, &mut evals) else {
            return fail(x, fx, evals, it);
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if first {
                identity(&mut h, sy / dot(&y, &y));
                first = false;
            }
            let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], &y)).collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }
        let rel = (fx - fnew).abs() / (1.0 + fx.abs());
        stalls = if rel < 1e-15 { stalls + 1 } else { 0 };
        x = xn;
        fx = fnew;
        g = gn;
        if stalls >= 5 {
            let grad_norm = max_abs(&g);
            return OptimResult { x, f: fx, grad_norm, iterations: it + 1, evaluations: evals, converged: grad_norm < 1e3 * opts.grad_tol, method: Method::Bfgs };
        }
    }
    let grad_norm = max_abs(&g);
    OptimResult { x, f: fx, grad_norm, iterations: opts.max_iter, evaluations: evals, converged: grad_norm < opts.grad_tol, method: Method::Bfgs }
}

/// Nelder-Mead with dimension-adaptive coefficients. `grad_norm` of the
/// result is left as NaN; callers polish with [`bfgs`] when they need it.
pub fn nelder_mead<F>(f: F, x0: &[f64], step: f64, opts: &OptimOptions) -> OptimResult
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);
    let mut evals = 0usize;
    let mut eval = |x: &[f64]| {
        evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step * x0[i].abs().max(1.0);
        let fv = eval(&v);
        simplex.push((v, fv));
    }
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (fb, fw) = (simplex[0].1, simplex[n].1);
        if fb.is_finite() && fw.is_finite() && (fw - fb).abs() <= opts.f_tol * (1.0 + fb.abs()) {
            let size = simplex[1..]
                .iter()
                .map(|(v, _)| v.iter().zip(&simplex[0].0).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
                .fold(0.0, f64::max);
            if size < 1e-8 {
                converged = true;
                break;
            }
        }
        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|(v, _)| v[j]).sum::<f64>() / nf).collect();
        let worst = simplex[n].0.clone();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst).map(|(c, w)| c + t * (c - w)).collect() };
        let xr = along(alpha);
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = along(alpha * gamma);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[n].1 {
            let xc = along(alpha * rho);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < simplex[n].1.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for k in 1..=n {
            let v: Vec<f64> = best.iter().zip(&simplex[k].0).map(|(b, x)| b + sigma * (x - b)).collect();
            let fv = eval(&v);
            simplex[k] = (v, fv);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    OptimResult { x, f: fx, grad_norm: f64::NAN, iterations, evaluations: evals, converged, method: Method::NelderMead }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn bfgs_rosenbrock() {
        let r = bfgs(rosenbrock, &[-1.2, 1.0], &OptimOptions::default());
        assert!(r.converged, "{r:?}");
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5, "{r:?}");
    }

    #[test]
    fn bfgs_quadratic_exact() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2) + 0.5 * x[2] * x[2];
        let r = bfgs(f, &[0.0, 0.0, 1.0], &OptimOptions::default());
        assert!(r.converged);
        assert!((r.x[0] - 3.0).abs() < 1e-6 && (r.x[1] + 2.0).abs() < 1e-6 && r.x[2].abs() < 1e-6);
    }

    #[test]
    fn bfgs_respects_infeasible_region() {
        // minimum of the smooth part lies at x = -1, but x < 0.5 is infeasible
        let f = |x: &[f64]| if x[0] < 0.5 { f64::INFINITY } else { (x[0] + 1.0).powi(2) };
        let r = bfgs(f, &[3.0], &OptimOptions::default());
        assert!(r.x[0] >= 0.5 && r.x[0] < 0.6, "{r:?}");
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let opts = OptimOptions { max_iter: 5000, ..Default::default() };
        let r = nelder_mead(rosenbrock, &[-1.2, 1.0], 0.5, &opts);
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4, "{r:?}");
    }

    #[test]
    fn gradient_one_sided_near_wall() {
        let f = |x: &[f64]| if x[0] < 0.0 { f64::INFINITY } else { x[0] * x[0] + x[0] };
        let g = numerical_gradient(&f, &[0.0], 0.0).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-4);
        let wall = |_: &[f64]| f64::INFINITY;
        assert!(numerical_gradient(&wall, &[0.0], 0.0).is_none());
    }
}
