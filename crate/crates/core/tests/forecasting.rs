mod common;

use mapvol::forecast::{
    impulse_response, marginal_effects, multi_step_forecast, ForecastOrigin, ForecastRules, PolicyVariable,
};
use mapvol::model::{filter, unconditional_mean, ModelInputs, ModelKind};
use mapvol::simulate::simulate_panel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const POLICY_KINDS: [ModelKind; 4] = [ModelKind::Xmap, ModelKind::Map, ModelKind::Lmap, ModelKind::Pmap];

fn scaled(kind: ModelKind, mut p: mapvol::ParamSet) -> mapvol::ParamSet {
    // keep multiplicative policy factors in a plausible range
    if kind == ModelKind::Pmap {
        p.delta *= 0.1;
        p.phi *= 0.1;
    }
    p.restrict(kind)
}

/// Derivative of `mu_s` with respect to `x_{s-tau-1}` (or `Delta_{s-tau}`)
/// by re-filtering perturbed inputs with realized volatility held fixed.
fn finite_difference(kind: ModelKind, p: &mapvol::ParamSet, inp: &ModelInputs, var: PolicyVariable, s: usize, tau: usize) -> f64 {
    // the additive and product forms are linear in the covariates
    let h = if kind == ModelKind::Lmap { 1e-3 } else { 1e-2 };
    let bump = |sign: f64| {
        let mut q = inp.clone();
        match var {
            PolicyVariable::Proxy => q.xc[s - tau - 1] += sign * h,
            PolicyVariable::Announcement => q.dc[s - tau] += sign * h,
        }
        filter(kind, p, &q).mu[s]
    };
    (bump(1.0) - bump(-1.0)) / (2.0 * h)
}

#[test]
fn closed_forms_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for kind in POLICY_KINDS {
        let mut checked = 0;
        for draw in 0..20 {
            let p = scaled(kind, common::random_params(&mut rng));
            let mut sc = common::scenario(kind, 400, draw);
            sc.params = p;
            let Ok(out) = simulate_panel(&sc) else { continue };
            let f = filter(kind, &p, &out.inputs);
            for var in [PolicyVariable::Proxy, PolicyVariable::Announcement] {
                for tau in [0usize, 1, 5] {
                    let me = marginal_effects(kind, &p, &f, &out.inputs, var, tau, 0..400);
                    let me = match me {
                        Ok(m) => m,
                        Err(_) if var == PolicyVariable::Announcement => continue,
                        Err(e) => panic!("{e}"),
                    };
                    for s in [50usize, 200, 399] {
                        let closed = me.series.as_ref().map_or(me.value, |v| v[s]);
                        let fd = finite_difference(kind, &p, &out.inputs, var, s, tau);
                        let tol = 1e-4 * closed.abs();
                        assert!((closed - fd).abs() <= tol, "{kind} {var:?} tau={tau} s={s}: {closed} vs {fd}");
                    }
                }
            }
            checked += 1;
        }
        assert!(checked >= 18, "{kind}: only {checked} usable draws");
    }
}

#[test]
fn constant_effects_decay_monotonically() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let p = common::random_params(&mut rng);
        for kind in [ModelKind::Map, ModelKind::Xmap] {
            let f = mapvol::FilterOutput { kind, sigma: vec![], xi: vec![], mu: vec![], eps: vec![], valid: true, invalid_at: None };
            let inp = ModelInputs { rv: vec![], neg: vec![], delta: vec![], xc: vec![], dc: vec![], x_bar: 0.0, delta_bar: 0.0, init_level: 1.0, window: 0..0 };
            let mut last = f64::INFINITY;
            for tau in 0..30 {
                let v = marginal_effects(kind, &p, &f, &inp, PolicyVariable::Proxy, tau, 0..0).unwrap().value.abs();
                assert!(v <= last);
                last = v;
            }
        }
    }
}

#[test]
fn paths_converge_to_unconditional_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let rules = ForecastRules { max_horizon: 2000, ..Default::default() };
    for _ in 0..20 {
        let p0 = common::random_params(&mut rng);
        for kind in ModelKind::ALL {
            let p = scaled(kind, p0);
            let m = unconditional_mean(kind, &p).unwrap();
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
            let Ok(path) = multi_step_forecast(kind, &p, &origin, &rules, 2000) else { continue };
            let end = path.mu[1999];
            assert!((end - m).abs() < 1e-6, "{kind}: {end} vs {m}");
        }
    }
}

#[test]
fn held_proxy_away_from_mean_shifts_the_limit() {
    let p = common::typical_params(ModelKind::Map);
    let m = unconditional_mean(ModelKind::Map, &p).unwrap();
    let origin = ForecastOrigin { index: 0, sigma: m, xi: 0.0, rv: m, neg: 0.5, xc: 0.1, x_bar: 0.3, delta_bar: 0.0 };
    let rules = ForecastRules { max_horizon: 2000, ..Default::default() };
    let path = multi_step_forecast(ModelKind::Map, &p, &origin, &rules, 2000).unwrap();
    // fixed point of the joint recursion with xi held at delta * xc / (1 - psi)
    let xi = p.delta * 0.1 / (1.0 - p.psi);
    let a = p.alpha + p.gamma / 2.0;
    let limit = (p.omega + xi * (1.0 - p.beta)) / (1.0 - a - p.beta);
    assert!((path.mu[1999] - limit).abs() < 1e-9);
}

#[test]
fn upward_path_from_below_is_nondecreasing() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let p = common::random_params(&mut rng);
        for kind in ModelKind::ALL {
            let p = scaled(kind, p);
            let m = unconditional_mean(kind, &p).unwrap();
            let origin = ForecastOrigin { index: 0, sigma: 0.5 * m, xi: if kind == ModelKind::Pmap { 1.0 } else { 0.0 }, rv: 0.5 * m, neg: 0.0, xc: 0.0, x_bar: 0.3, delta_bar: 0.0 };
            let path = multi_step_forecast(kind, &p, &origin, &ForecastRules::default(), 300).unwrap();
            if path.mu[0] < m {
                assert!(path.mu.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{kind}");
            }
        }
    }
}

#[test]
fn irf_linear_and_signed_for_additive_kinds() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let p = common::random_params(&mut rng);
        for kind in [ModelKind::Map, ModelKind::Xmap] {
            let m = unconditional_mean(kind, &p).unwrap();
            let o = ForecastOrigin { index: 0, sigma: m, xi: 0.0, rv: m, neg: 0.0, xc: 0.0, x_bar: 0.3, delta_bar: 0.0 };
            let a = impulse_response(kind, &p, &o, &ForecastRules::default(), 100, 0.02).unwrap();
            let b = impulse_response(kind, &p, &o, &ForecastRules::default(), 100, 0.04).unwrap();
            for h in 0..100 {
                assert!((2.0 * a.diff[h] - b.diff[h]).abs() < 1e-10);
                assert!(a.diff[h] < 0.0, "sign must follow delta");
            }
        }
    }
}

#[test]
fn origin_from_filter_reproduces_one_step_filter() {
    for kind in ModelKind::ALL {
        let out = simulate_panel(&common::scenario(kind, 600, 4)).unwrap();
        let p = common::typical_params(kind);
        let f = filter(kind, &p, &out.inputs);
        let t = 400;
        let o = ForecastOrigin::from_filter(&f, &out.inputs, t).unwrap();
        // with the mean-announcement rule the first step matches the filter
        // whenever no announcement falls on t+1
        if out.inputs.delta[t + 1] == 0 && out.inputs.delta_bar == 0.0 {
            let path = multi_step_forecast(kind, &p, &o, &ForecastRules::default(), 1).unwrap();
            assert!((path.mu[0] - f.mu[t + 1]).abs() < 1e-12);
        }
        let rules = ForecastRules { delta: mapvol::forecast::DeltaForecastRule::Calendar(vec![out.inputs.delta[t + 1]]), ..Default::default() };
        let path = multi_step_forecast(kind, &p, &o, &rules, 1).unwrap();
        assert!((path.mu[0] - f.mu[t + 1]).abs() < 1e-12 * f.mu[t + 1], "{kind}");
    }
}
