//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Set `MAPVOL_DATA` to a panel CSV for an extra informational run.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use mapvol::estimate::diagnostics::information_criteria;
use mapvol::estimate::transform::Transform;
use mapvol::estimate::{fit, gamma_log_density, gamma_loglik, FitOptions};
use mapvol::evaluate::{model_confidence_set, LossKind, LossMatrix, McsOptions};
use mapvol::forecast::{
    convergence_horizon, marginal_effects, multi_step_forecast, ConvergenceRule, ForecastOrigin, ForecastRules,
    PolicyVariable,
};
use mapvol::model::{filter, unconditional_mean, FilterOutput, ModelInputs, ModelKind, ParamSet};
use mapvol::optim::numerical_gradient;
use mapvol::simulate::{business_days, gamma_draw, simulate_panel, SimScenario, XRule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn typical_params(kind: ModelKind) -> ParamSet {
    let p = match kind {
        ModelKind::Amem => ParamSet::amem(0.857, 0.171, 0.708, 0.113, 7.559),
        ModelKind::Xmap => ParamSet { omega: 1.136, alpha: 0.165, beta: 0.689, gamma: 0.120, delta: -0.636, phi: 1.297, psi: 0.0, theta: 7.728 },
        ModelKind::Map => ParamSet { omega: 1.056, alpha: 0.154, beta: 0.707, gamma: 0.117, delta: -1.836, phi: 2.817, psi: 0.111, theta: 7.817 },
        ModelKind::Lmap => ParamSet { omega: 1.011, alpha: 0.151, beta: 0.712, gamma: 0.119, delta: -0.297, phi: 0.464, psi: 0.194, theta: 7.827 },
        ModelKind::Pmap => ParamSet { omega: 1.025, alpha: 0.153, beta: 0.709, gamma: 0.119, delta: -0.161, phi: 0.231, psi: 0.134, theta: 7.820 },
    };
    p.restrict(kind)
}

fn scenario(kind: ModelKind, params: ParamSet, t_len: usize, seed: u64) -> SimScenario {
    let mut s = SimScenario::new(kind, params, t_len, seed);
    s.x = XRule::RandomWalk { start: 0.3, drift: 0.0, sd: 0.002 };
    s
}

/// Stationary draw with `0 < psi < beta`.
fn random_params<R: Rng>(rng: &mut R) -> ParamSet {
    let alpha = rng.random_range(0.02..0.25);
    let gamma = rng.random_range(0.0..0.15);
    let beta = rng.random_range(0.3..(0.97 - alpha - gamma / 2.0));
    ParamSet {
        omega: rng.random_range(0.2..2.0),
        alpha,
        beta,
        gamma,
        delta: rng.random_range(-2.0..-0.1),
        phi: rng.random_range(0.1..2.0),
        psi: rng.random_range(0.3..0.95) * beta,
        theta: rng.random_range(3.0..12.0),
    }
}

fn scaled(kind: ModelKind, mut p: ParamSet) -> ParamSet {
    if kind == ModelKind::Pmap {
        p.delta *= 0.1;
        p.phi *= 0.1;
    }
    p.restrict(kind)
}

fn check(cond: bool, detail: String) -> Outcome {
    if cond { Ok(detail) } else { Err(detail) }
}

fn ac1() -> Outcome {
    let (aic, bic) = information_criteria(-7825.1, 2686, 5);
    check(
        (aic - 5.830).abs() <= 1e-3 && (bic - 5.841).abs() <= 1e-3,
        format!("AIC {aic:.4}, BIC {bic:.4}"),
    )
}

fn ac2() -> Outcome {
    let p = typical_params(ModelKind::Map);
    let f = FilterOutput { kind: ModelKind::Map, sigma: vec![], xi: vec![], mu: vec![], eps: vec![], valid: true, invalid_at: None };
    let inp = ModelInputs { rv: vec![], neg: vec![], delta: vec![], xc: vec![], dc: vec![], x_bar: 0.0, delta_bar: 0.0, init_level: 1.0, window: 0..0 };
    let me = marginal_effects(ModelKind::Map, &p, &f, &inp, PolicyVariable::Proxy, 0, 0..0).map_err(|e| e.to_string())?;
    check(me.value == p.delta && me.value == -1.836, format!("MAP tau=0 effect of x = {}", me.value))
}

fn ac3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst = 0.0f64;
    let mut compared = 0usize;
    for kind in [ModelKind::Xmap, ModelKind::Map, ModelKind::Lmap, ModelKind::Pmap] {
        let mut draws = 0;
        for draw in 0..20u64 {
            let p = scaled(kind, random_params(&mut rng));
            let Ok(out) = simulate_panel(&scenario(kind, p, 400, draw)) else { continue };
            let inp = &out.inputs;
            let f = filter(kind, &p, inp);
            draws += 1;
            for var in [PolicyVariable::Proxy, PolicyVariable::Announcement] {
                for tau in [0usize, 1, 5] {
                    let Ok(me) = marginal_effects(kind, &p, &f, inp, var, tau, 0..400) else { continue };
                    for s in [50usize, 200, 399] {
                        let closed = me.series.as_ref().map_or(me.value, |v| v[s]);
                        let h = if kind == ModelKind::Lmap { 1e-3 } else { 1e-2 };
                        let bump = |sign: f64| {
                            let mut q = inp.clone();
                            match var {
                                PolicyVariable::Proxy => q.xc[s - tau - 1] += sign * h,
                                PolicyVariable::Announcement => q.dc[s - tau] += sign * h,
                            }
                            filter(kind, &p, &q).mu[s]
                        };
                        let fd = (bump(1.0) - bump(-1.0)) / (2.0 * h);
                        if closed != 0.0 {
                            worst = worst.max((closed - fd).abs() / closed.abs());
                        }
                        compared += 1;
                    }
                }
            }
        }
        if draws < 18 {
            return Err(format!("{kind}: only {draws} usable draws"));
        }
    }
    check(worst <= 1e-4, format!("{compared} comparisons, worst relative error {worst:.2e}"))
}

fn ac4() -> Outcome {
    const REPS: u64 = 50;
    let mut lines = Vec::new();
    let mut ok_all = true;
    for kind in ModelKind::ALL {
        let truth = typical_params(kind);
        let hits: usize = (0..REPS)
            .into_par_iter()
            .map(|seed| {
                let Ok(out) = simulate_panel(&scenario(kind, truth, 5000, seed)) else { return 0 };
                let Ok(inp) = ModelInputs::full(&out.panel) else { return 0 };
                let Ok(r) = fit(kind, &inp, &FitOptions { seed, ..Default::default() }) else { return 0 };
                let covered = r.estimates.iter().all(|e| {
                    e.robust_se.is_some_and(|se| (e.value - truth.get(e.param)).abs() <= 3.0 * se)
                });
                usize::from(covered)
            })
            .sum();
        ok_all &= hits as f64 >= 0.9 * REPS as f64;
        lines.push(format!("{kind} {hits}/{REPS}"));
    }
    check(ok_all, lines.join(", "))
}

fn ac5() -> Outcome {
    let mut worst = 0.0f64;
    let mut ll_gap = f64::INFINITY;
    for seed in 0..3u64 {
        let out = simulate_panel(&scenario(ModelKind::Map, typical_params(ModelKind::Map), 2000, seed)).map_err(|e| e.to_string())?;
        let inp = ModelInputs::full(&out.panel).map_err(|e| e.to_string())?;
        let amem_p = typical_params(ModelKind::Amem);
        let xmap_p = ParamSet { delta: 0.0, phi: 0.0, ..amem_p };
        let a = filter(ModelKind::Amem, &amem_p, &inp);
        let x = filter(ModelKind::Xmap, &xmap_p, &inp);
        worst = a.mu.iter().zip(&x.mu).map(|(u, v)| (u - v).abs()).fold(worst, f64::max);
        let amem = fit(ModelKind::Amem, &inp, &FitOptions::default()).map_err(|e| e.to_string())?;
        let xmap = fit(ModelKind::Xmap, &inp, &FitOptions::default()).map_err(|e| e.to_string())?;
        ll_gap = ll_gap.min(xmap.loglik - amem.loglik);
    }
    check(
        worst <= 1e-12 && ll_gap >= -1e-6,
        format!("max filter gap {worst:.1e}, min loglik(X-MAP) - loglik(AMEM) {ll_gap:.3}"),
    )
}

fn ac6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let rules = ForecastRules { max_horizon: 2000, ..Default::default() };
    let mut worst = 0.0f64;
    let mut paths = 0;
    for _ in 0..20 {
        let p0 = random_params(&mut rng);
        for kind in ModelKind::ALL {
            let p = scaled(kind, p0);
            let m = unconditional_mean(kind, &p).map_err(|e| e.to_string())?;
            let origin = ForecastOrigin {
                index: 0,
                sigma: m * rng.random_range(0.3..3.0),
                xi: if kind == ModelKind::Pmap { rng.random_range(0.8..1.2) } else { rng.random_range(-0.5..0.5) },
                rv: m * rng.random_range(0.3..3.0),
                neg: f64::from(rng.random::<bool>()),
                xc: 0.0,
                x_bar: 0.3,
                delta_bar: 0.05,
            };
            let path = multi_step_forecast(kind, &p, &origin, &rules, 2000).map_err(|e| e.to_string())?;
            worst = worst.max((path.mu[1999] - m).abs());
            paths += 1;
        }
    }
    let mu: Vec<f64> = (1..=200).map(|h| 0.4 + 0.2 * 0.9f64.powi(h)).collect();
    let closed = convergence_horizon(&mu, 0.01, ConvergenceRule::DistanceToLimit, 0.4).map_err(|e| e.to_string())?;
    let successive = convergence_horizon(&mu, 0.01, ConvergenceRule::SuccessiveDifference, 0.4).map_err(|e| e.to_string())?;
    check(
        worst < 1e-6 && closed == Some(29),
        format!(
            "{paths} paths, worst |mu_2000 - limit| {worst:.1e}; geometric path horizon {closed:?} (distance to limit), {successive:?} (successive difference)"
        ),
    )
}

fn exp_matrix(m: usize, n: usize, seed: u64, shift: &[f64], loss: LossKind) -> LossMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols = (0..m)
        .map(|j| (0..n).map(|_| gamma_draw(1.0, &mut rng) + shift.get(j).copied().unwrap_or(0.0)).collect())
        .collect();
    let dates = business_days(chrono::NaiveDate::from_ymd_opt(2016, 1, 4).expect("date"), n);
    LossMatrix::new(loss, (0..m).map(|j| format!("m{j}")).collect(), dates, cols).expect("matrix")
}

fn ac7() -> Outcome {
    let base = exp_matrix(1, 300, 1, &[], LossKind::QLike);
    let c = base.column(0).to_vec();
    let same = LossMatrix::new(LossKind::QLike, vec!["a".into(), "b".into(), "c".into()], base.dates.clone(), vec![c.clone(), c.clone(), c])
        .map_err(|e| e.to_string())?;
    let r = model_confidence_set(&same, &McsOptions { replications: 500, ..Default::default() }).map_err(|e| e.to_string())?;
    let identical = r.survivors.len() == 3 && r.p_values.iter().all(|&p| p == 1.0);

    let hits = (0..20u64)
        .filter(|&seed| {
            let l = exp_matrix(4, 500, seed, &[0.0, 0.0, 1.0, 0.0], LossKind::Mse);
            let r = model_confidence_set(&l, &McsOptions { replications: 2000, seed, ..Default::default() }).expect("mcs");
            r.p_value("m2").is_some_and(|p| p < 0.01) && !r.contains("m2")
        })
        .count();

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut nested = true;
    for seed in 0..10u64 {
        let shifts: Vec<f64> = (0..5).map(|_| rng.random_range(0.0..0.3)).collect();
        let l = exp_matrix(5, 300, seed, &shifts, LossKind::Mse);
        let o = McsOptions { replications: 500, seed, ..Default::default() };
        let wide = model_confidence_set(&l, &McsOptions { level: 0.10, ..o }).map_err(|e| e.to_string())?;
        let narrow = model_confidence_set(&l, &McsOptions { level: 0.25, ..o }).map_err(|e| e.to_string())?;
        nested &= narrow.survivors.iter().all(|m| wide.contains(m));
    }
    check(
        identical && hits >= 19 && nested,
        format!("identical columns survive: {identical}; shifted model eliminated in {hits}/20; nested: {nested}"),
    )
}

fn ac8() -> Outcome {
    let pdf = |y: f64, k: f64, s: f64| y.powf(k - 1.0) * (-y / s).exp() / (ln_gamma(k).exp() * s.powf(k));
    let triples = [(1.0, 1.0, 1.0), (1.0, 2.0, 2.0), (2.0, 1.0, 1.0), (7.8, 12.5, 10.1), (0.7, 3.0, 0.2), (25.0, 9.0, 9.4)];
    let dens = triples
        .iter()
        .map(|&(th, mu, rv)| (gamma_log_density(th, mu, rv) - pdf(rv, th, mu / th).ln()).abs())
        .fold(0.0, f64::max);

    let kind = ModelKind::Map;
    let out = simulate_panel(&scenario(kind, typical_params(kind), 1500, 1)).map_err(|e| e.to_string())?;
    let inp = ModelInputs::full(&out.panel).map_err(|e| e.to_string())?;
    let tr = Transform::new(kind);
    let n = inp.likelihood_range().len() as f64;
    let obj = |u: &[f64]| {
        let p = tr.to_natural(u);
        -gamma_loglik(&filter(kind, &p, &inp), p.theta, &inp) / n
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let centre = tr.to_unconstrained(&typical_params(kind)).map_err(|e| e.to_string())?;
    let mut grad = 0.0f64;
    for _ in 0..20 {
        let u: Vec<f64> = centre.iter().map(|c| c + rng.random_range(-0.3..0.3)).collect();
        let g = numerical_gradient(&obj, &u, obj(&u)).ok_or("gradient not finite")?;
        for i in 0..u.len() {
            let d = |h: f64| {
                let mut a = u.clone();
                let mut b = u.clone();
                a[i] += h;
                b[i] -= h;
                (obj(&a) - obj(&b)) / (2.0 * h)
            };
            let reference = (4.0 * d(5e-5) - d(1e-4)) / 3.0;
            grad = grad.max((g[i] - reference).abs() / reference.abs().max(1e-3));
        }
    }
    check(dens <= 1e-10 && grad <= 1e-5, format!("density error {dens:.1e}, gradient relative error {grad:.1e}"))
}

fn ac9() -> Outcome {
    let kind = ModelKind::Map;
    let t = 1_000_000usize;
    let sc = scenario(kind, typical_params(kind), t, 99);
    let theta = sc.params.theta;
    let out = simulate_panel(&sc).map_err(|e| e.to_string())?;
    let f = filter(kind, &sc.params, &out.inputs);
    let n = t as f64;
    let mean = f.eps.iter().sum::<f64>() / n;
    let var = f.eps.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
    // four standard errors of the sample mean and variance
    let mean_band = 4.0 * (1.0 / theta / n).sqrt();
    let var_band = 4.0 * ((6.0 / theta.powi(3) + 2.0 / theta.powi(2)) / n).sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut d: Vec<f64> = (0..100_000).map(|_| gamma_draw(1.0, &mut rng)).collect();
    d.sort_by(f64::total_cmp);
    let m = d.len() as f64;
    let ks = d.iter().enumerate().fold(0.0f64, |acc, (i, &x)| {
        let cdf = 1.0 - (-x).exp();
        acc.max((cdf - i as f64 / m).abs()).max(((i + 1) as f64 / m - cdf).abs())
    });
    check(
        (mean - 1.0).abs() <= mean_band && (var - 1.0 / theta).abs() <= var_band && ks < 0.006,
        format!("residual mean {mean:.5}, variance {var:.5} (1/theta {:.5}), KS {ks:.4}", 1.0 / theta),
    )
}

fn run_pipeline(bin: &str, dir: &Path) -> Result<(), String> {
    let config = dir.join("run.toml");
    std::fs::write(
        &config,
        format!(
            r#"seed = 11
output_dir = "{}"
[data]
input = "{}"
[estimation]
models = ["AMEM", "X-MAP", "MAP"]
[evaluation]
splits = ["2008-06-30"]
[mcs]
replications = 300
[simulate]
kind = "MAP"
t_len = 1200
"#,
            dir.join("out").display(),
            dir.join("panel.csv").display()
        ),
    )
    .map_err(|e| e.to_string())?;
    let panel = dir.join("panel.csv");
    let steps: [&[&str]; 4] = [
        &["simulate", "--output", panel.to_str().expect("utf-8 path")],
        &["estimate"],
        &["forecast", "--horizon", "60"],
        &["mcs"],
    ];
    for args in steps {
        let out = Command::new(bin)
            .arg("--config")
            .arg(&config)
            .args(args)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("{args:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
        }
    }
    Ok(())
}

fn ac10() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_mapvol");
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_pipeline(bin, a.path())?;
    run_pipeline(bin, b.path())?;
    let mut names: Vec<String> = std::fs::read_dir(a.path().join("out"))
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
        .filter(|n| n.ends_with(".json"))
        .collect();
    names.sort();
    if names.len() < 4 {
        return Err(format!("only {} JSON artifacts: {names:?}", names.len()));
    }
    let mut differing = Vec::new();
    for n in &names {
        let x = std::fs::read(a.path().join("out").join(n)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.path().join("out").join(n)).map_err(|e| e.to_string())?;
        if x != y {
            differing.push(n.clone());
        }
    }
    let panels_equal = std::fs::read(a.path().join("panel.csv")).ok() == std::fs::read(b.path().join("panel.csv")).ok();
    check(
        differing.is_empty() && panels_equal,
        format!("{} JSON artifacts compared ({}), differing: {differing:?}", names.len(), names.join(", ")),
    )
}

/// Fits every kind to a user-supplied panel and prints headline quantities.
fn data_conditional(path: &str) {
    let opts = mapvol::data::LoadOptions::default();
    let panel = match mapvol::load_panel(path, &opts) {
        Ok(p) => p.panel,
        Err(e) => {
            println!("INFO data-conditional: cannot load {path}: {e}");
            return;
        }
    };
    match mapvol::data::announcement_window_stats(&panel, 5) {
        Ok(s) => println!(
            "INFO data-conditional: announcement windows mean before {:.1}%, after {:.1}%",
            s.mean_before_pct, s.mean_after_pct
        ),
        Err(e) => println!("INFO data-conditional: window stats unavailable: {e}"),
    }
    let Ok(inp) = ModelInputs::full(&panel) else { return };
    for kind in ModelKind::ALL {
        match fit(kind, &inp, &FitOptions::default()) {
            Ok(r) => {
                let conv = ForecastOrigin::last(&filter(kind, &r.params, &inp), &inp)
                    .and_then(|o| multi_step_forecast(kind, &r.params, &o, &ForecastRules::default(), 750))
                    .and_then(|p| p.convergence(0.01, ConvergenceRule::SuccessiveDifference));
                let h = conv.ok().and_then(|c| c.horizon);
                println!(
                    "INFO data-conditional: {kind} loglik {:.1} AIC {:.3} persistence {:.3} convergence horizon {h:?}",
                    r.loglik, r.aic, r.persistence
                );
            }
            Err(e) => println!("INFO data-conditional: {kind} failed: {e}"),
        }
    }
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("AC1", "information criteria convention", ac1),
        ("AC2", "MAP marginal effect identity", ac2),
        ("AC3", "closed-form marginal effects vs finite differences", ac3),
        ("AC4", "parameter recovery within 3 robust s.e.", ac4),
        ("AC5", "nesting and likelihood ordering", ac5),
        ("AC6", "forecast convergence", ac6),
        ("AC7", "model confidence set correctness", ac7),
        ("AC8", "Gamma QML density and gradient", ac8),
        ("AC9", "simulation law", ac9),
        ("AC10", "pipeline determinism", ac10),
    ];
    let filter_arg: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, f) in criteria {
        if !filter_arg.is_empty() && !filter_arg.iter().any(|a| a == id) {
            continue;
        }
        let t0 = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t0.elapsed().as_secs_f64();
        match res {
            Ok(d) => println!("PASS {id} {name}: {d} [{secs:.1}s]"),
            Err(d) => {
                failed += 1;
                println!("FAIL {id} {name}: {d} [{secs:.1}s]");
            }
        }
    }
    if let Ok(path) = std::env::var("MAPVOL_DATA") {
        data_conditional(&path);
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
