//! Subcommand implementations.

use std::ops::Range;
use std::path::Path;

use chrono::NaiveDate;
use mapvol::data::{announcement_window_stats, AnnouncementStats, LoadOptions};
use mapvol::evaluate::{EstimationScheme, OosOptions, OosRun};
use mapvol::forecast::{
    default_shock, Convergence, DeltaForecastRule, ForecastMode, ForecastOrigin, XForecastRule,
};
use mapvol::model::policy_share;
use mapvol::report::{self, McsGridRow, TextTable};
use mapvol::simulate::{simulate_panel, AnnouncementRule, SimScenario};
use mapvol::{
    filter, fit, impulse_response, load_panel, marginal_effects, model_confidence_set, multi_step_forecast,
    oos_forecast_run, write_panel, EstimationResult, FitOptions, ForecastPath, ForecastRules, IrfPath, LossKind,
    MarginalEffect, McsOptions, McsResult, ModelInputs, ModelKind, PanelSeries, ParamSet, PolicyVariable,
};
use serde::{Deserialize, Serialize};

use crate::config::{default_params, FutureRule, RunConfig, Scheme};
use crate::error::CliError;
use crate::output::Output;
use crate::svg::LineChart;
use crate::Command;

pub fn dispatch(cmd: &Command, cfg: &RunConfig, _config_path: Option<&Path>) -> Result<(), CliError> {
    match cmd {
        Command::Estimate(_) => cmd_estimate(cfg),
        Command::Forecast(_) => cmd_forecast(cfg, true),
        Command::Irf(_) => cmd_forecast(cfg, false),
        Command::Evaluate(_) => cmd_evaluate(cfg).map(|_| ()),
        Command::Mcs(_) => cmd_mcs(cfg),
        Command::Simulate(a) => cmd_simulate(cfg, a.output.as_deref()),
        Command::Stylized(_) => cmd_stylized(cfg),
        Command::Report => cmd_report(cfg),
    }
}

pub fn load(cfg: &RunConfig) -> Result<PanelSeries, CliError> {
    let path = cfg
        .data
        .input
        .as_ref()
        .ok_or_else(|| CliError::usage("no input panel; pass --input or set data.input"))?;
    let opts = LoadOptions { columns: cfg.data.columns.clone(), delimiter: cfg.data.delimiter as u8 };
    let loaded = load_panel(path, &opts).map_err(|e| CliError::from(e).context(&path.display().to_string()))?;
    if !loaded.dropped.is_empty() {
        log::warn!("{} rows dropped while loading {}", loaded.dropped.len(), path.display());
    }
    Ok(loaded.panel)
}

fn fit_options(cfg: &RunConfig) -> FitOptions {
    let e = &cfg.estimation;
    FitOptions {
        starts: e.starts,
        seed: cfg.seed,
        max_iter: e.max_iter,
        grad_tol: e.grad_tol,
        se_grad_tol: e.se_grad_tol,
        psi_below_beta: e.psi_below_beta,
        min_window: e.min_window,
        lb_lags: e.lb_lags.clone(),
        parallel: true,
    }
}

fn window(cfg: &RunConfig, panel: &PanelSeries) -> Result<Range<usize>, CliError> {
    let w = panel.date_range(cfg.estimation.start, cfg.estimation.end);
    if w.len() < 2 {
        return Err(CliError::usage(format!("estimation window holds {} observations", w.len())));
    }
    Ok(w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowInfo {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub first_index: usize,
    pub nobs: usize,
}

impl WindowInfo {
    fn new(panel: &PanelSeries, w: &Range<usize>) -> Self {
        Self { start: panel.dates()[w.start], end: panel.dates()[w.end - 1], first_index: w.start, nobs: w.len() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub kind: ModelKind,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyShareReport {
    pub kind: ModelKind,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatesReport {
    pub window: WindowInfo,
    pub results: Vec<EstimationResult>,
    pub failures: Vec<Failure>,
    pub marginal_effects: Vec<MarginalEffect>,
    pub policy_share: Option<PolicyShareReport>,
    pub notes: Vec<String>,
}

fn estimates_text(r: &EstimatesReport) -> String {
    let mut s = format!(
        "Estimation window {} to {} ({} observations)\n\n",
        r.window.start, r.window.end, r.window.nobs
    );
    if !r.results.is_empty() {
        s.push_str(&report::estimation_table(&r.results).render());
        s.push('\n');
        s.push_str(&report::comparison_table(&r.results).render());
    }
    if !r.marginal_effects.is_empty() {
        s.push('\n');
        s.push_str(&report::marginal_effects_table(&r.marginal_effects).render());
    }
    if let Some(p) = &r.policy_share {
        s.push_str(&format!("\nAverage policy share of expected volatility ({}): {:.2}%\n", p.kind, 100.0 * p.mean));
    }
    for n in &r.notes {
        s.push_str(&format!("note: {n}\n"));
    }
    for f in &r.failures {
        s.push_str(&format!("failed: {}: {}\n", f.kind, f.error));
    }
    s
}

pub fn cmd_estimate(cfg: &RunConfig) -> Result<(), CliError> {
    let panel = load(cfg)?;
    let w = window(cfg, &panel)?;
    let inp = ModelInputs::new(&panel, w.clone())?;
    let opts = fit_options(cfg);
    let mut out = Output::new(cfg)?;
    let mut rep = EstimatesReport {
        window: WindowInfo::new(&panel, &w),
        results: Vec::new(),
        failures: Vec::new(),
        marginal_effects: Vec::new(),
        policy_share: None,
        notes: Vec::new(),
    };
    for &kind in &cfg.estimation.models {
        log::info!("fitting {kind}");
        let res = match fit(kind, &inp, &opts) {
            Ok(r) => r,
            Err(e) => {
                log::error!("{kind}: {e}");
                rep.failures.push(Failure { kind, error: e.to_string() });
                continue;
            }
        };
        let f = filter(kind, &res.params, &inp);
        if f.valid {
            out.csv(&format!("components_{}.csv", kind.slug()), |wr| f.write_csv(panel.dates(), wr))?;
            let dates: Vec<String> = panel.dates()[w.clone()].iter().map(|d| d.to_string()).collect();
            let mut chart = LineChart::new(format!("{kind} components"))
                .labels("date", "volatility")
                .series("realized", panel.rv()[w.clone()].to_vec())
                .series("expected", f.mu[w.clone()].to_vec())
                .series("smooth component", f.sigma[w.clone()].to_vec());
            if kind.has_policy() {
                chart = chart.series_right("policy component", f.xi[w.clone()].to_vec());
                chart.y2_label = "policy component".into();
            }
            chart.x = (0..dates.len()).map(|i| i as f64).collect();
            chart.x_tick_labels = dates;
            out.svg(&format!("components_{}.svg", kind.slug()), &chart.render())?;

            if kind.has_policy() {
                for &tau in &cfg.estimation.marginal_taus {
                    for var in [PolicyVariable::Proxy, PolicyVariable::Announcement] {
                        let range = (w.start + tau).min(w.end - 1)..w.end;
                        match marginal_effects(kind, &res.params, &f, &inp, var, tau, range) {
                            Ok(mut me) => {
                                me.series = None;
                                rep.marginal_effects.push(me);
                            }
                            Err(e) => rep.notes.push(format!("{kind} marginal effect of {} at tau={tau}: {e}", var.name())),
                        }
                    }
                }
            }
            if kind == ModelKind::Map {
                match policy_share(&f, inp.likelihood_range()) {
                    Ok(ps) => rep.policy_share = Some(PolicyShareReport { kind, mean: ps.mean }),
                    Err(e) => rep.notes.push(format!("policy share: {e}")),
                }
            }
        }
        rep.results.push(res);
    }
    out.json("estimates.json", &rep)?;
    out.text("estimates.txt", &estimates_text(&rep))?;
    if rep.failures.is_empty() {
        Ok(())
    } else {
        let kinds: Vec<&str> = rep.failures.iter().map(|f| f.kind.name()).collect();
        Err(CliError::numerical(format!("estimation failed for {}", kinds.join(", "))))
    }
}

type Fitted = Vec<(ModelKind, ParamSet)>;

fn estimated_params(
    cfg: &RunConfig,
    inp: &ModelInputs,
) -> Result<(Fitted, Vec<Failure>), CliError> {
    if let Some(p) = &cfg.forecast.estimates {
        let text = std::fs::read_to_string(p).map_err(|e| CliError::data(format!("cannot read {}: {e}", p.display())))?;
        let rep: EstimatesReport = serde_json::from_str(&text)?;
        let v: Vec<_> = rep
            .results
            .into_iter()
            .filter(|r| cfg.estimation.models.contains(&r.kind))
            .map(|r| (r.kind, r.params))
            .collect();
        if v.is_empty() {
            return Err(CliError::data(format!("{} holds none of the selected models", p.display())));
        }
        return Ok((v, Vec::new()));
    }
    let opts = fit_options(cfg);
    let mut v = Vec::new();
    let mut failures = Vec::new();
    for &kind in &cfg.estimation.models {
        match fit(kind, inp, &opts) {
            Ok(r) => v.push((kind, r.params)),
            Err(e) => {
                log::error!("{kind}: {e}");
                failures.push(Failure { kind, error: e.to_string() });
            }
        }
    }
    Ok((v, failures))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastEntry {
    pub path: ForecastPath,
    pub convergence: Convergence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrfEntry {
    pub kind: ModelKind,
    pub shock: f64,
    pub diff: Vec<f64>,
    pub peak_step: usize,
    pub peak: f64,
    pub baseline_convergence: Convergence,
    pub shocked_convergence: Convergence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastReport {
    pub window: WindowInfo,
    pub origin: NaiveDate,
    pub horizon: usize,
    pub forecasts: Vec<ForecastEntry>,
    pub irfs: Vec<IrfEntry>,
    pub failures: Vec<Failure>,
}

fn forecast_text(r: &ForecastReport) -> String {
    let mut s = String::new();
    if !r.forecasts.is_empty() {
        let header = ["", "step 1", "step H", "limit", "converged at"].map(String::from).to_vec();
        let mut t = TextTable::new(header)
            .title(format!("Multi-step forecasts from {} (H = {})", r.origin, r.horizon));
        for e in &r.forecasts {
            let p = &e.path;
            t.push(vec![
                p.kind.name().into(),
                format!("{:.3}", p.mu[0]),
                format!("{:.3}", p.mu[p.mu.len() - 1]),
                format!("{:.3}", p.unconditional_mean),
                e.convergence.horizon.map_or("not converged".into(), |h| h.to_string()),
            ]);
        }
        if let Some(e) = r.forecasts.first() {
            t.notes.push(format!("Convergence rule {:?}, tolerance {}.", e.convergence.rule, e.convergence.tol));
        }
        s.push_str(&t.render());
    }
    if !r.irfs.is_empty() {
        let header = ["", "shock", "peak step", "peak diff", "baseline conv.", "shocked conv."].map(String::from).to_vec();
        let mut t = TextTable::new(header).title("Impulse responses to a sustained proxy shock");
        for e in &r.irfs {
            let conv = |c: &Convergence| c.horizon.map_or("not converged".into(), |h| h.to_string());
            t.push(vec![
                e.kind.name().into(),
                format!("{:.4}", e.shock),
                e.peak_step.to_string(),
                format!("{:.4}", e.peak),
                conv(&e.baseline_convergence),
                conv(&e.shocked_convergence),
            ]);
        }
        if !s.is_empty() {
            s.push('\n');
        }
        s.push_str(&t.render());
    }
    for f in &r.failures {
        s.push_str(&format!("failed: {}: {}\n", f.kind, f.error));
    }
    s
}

fn forecast_rules(cfg: &RunConfig, panel: &PanelSeries, origin: usize) -> ForecastRules {
    let fc = &cfg.forecast;
    let x = match fc.x_rule {
        FutureRule::Default => XForecastRule::Hold,
        FutureRule::Observed => {
            let v = panel.x()[origin + 1..].to_vec();
            if v.is_empty() { XForecastRule::Hold } else { XForecastRule::Path(v) }
        }
    };
    let delta = match fc.delta_rule {
        FutureRule::Default => DeltaForecastRule::Mean,
        FutureRule::Observed => DeltaForecastRule::Calendar(panel.delta()[origin + 1..].to_vec()),
    };
    let mode = if fc.monte_carlo_draws > 0 {
        ForecastMode::MonteCarlo { draws: fc.monte_carlo_draws, seed: cfg.seed }
    } else {
        ForecastMode::PlugIn
    };
    ForecastRules { x, delta, x_shock: 0.0, mode, max_horizon: fc.max_horizon }
}

/// Convergence of `path`; a path too short to judge counts as unconverged.
fn convergence(path: &ForecastPath, cfg: &RunConfig) -> Convergence {
    let fc = &cfg.forecast;
    path.convergence(fc.tolerance, fc.convergence_rule).unwrap_or(Convergence {
        rule: fc.convergence_rule,
        tol: fc.tolerance,
        horizon: None,
        limit: path.unconditional_mean,
    })
}

pub fn cmd_forecast(cfg: &RunConfig, with_paths: bool) -> Result<(), CliError> {
    let panel = load(cfg)?;
    let w = window(cfg, &panel)?;
    let inp = ModelInputs::new(&panel, w.clone())?;
    let origin = match cfg.forecast.origin {
        Some(d) => {
            let n = panel.count_through(d);
            if n == 0 {
                return Err(CliError::usage(format!("forecast origin {d} precedes the panel")));
            }
            n - 1
        }
        None => w.end - 1,
    };
    let (params, failures) = estimated_params(cfg, &inp)?;
    let rules = forecast_rules(cfg, &panel, origin);
    let fc = &cfg.forecast;
    let shock = match fc.irf_shock {
        Some(s) => s,
        None => default_shock(panel.x(), w.clone())?,
    };
    let mut out = Output::new(cfg)?;
    let mut rep = ForecastReport {
        window: WindowInfo::new(&panel, &w),
        origin: panel.dates()[origin],
        horizon: fc.horizon,
        forecasts: Vec::new(),
        irfs: Vec::new(),
        failures,
    };
    let mut numerical = Vec::new();
    for (kind, p) in &params {
        let f = filter(*kind, p, &inp);
        let o = match ForecastOrigin::from_filter(&f, &inp, origin) {
            Ok(o) => o,
            Err(e) => {
                numerical.push(Failure { kind: *kind, error: e.to_string() });
                continue;
            }
        };
        let step = || -> mapvol::Result<(ForecastPath, IrfPath)> {
            let path = multi_step_forecast(*kind, p, &o, &rules, fc.horizon)?;
            let irf = impulse_response(*kind, p, &o, &rules, fc.horizon, shock)?;
            Ok((path, irf))
        };
        let (path, irf) = match step() {
            Ok(v) => v,
            Err(e) => {
                numerical.push(Failure { kind: *kind, error: e.to_string() });
                continue;
            }
        };
        let conv = convergence(&path, cfg);
        if conv.horizon.is_none() {
            log::warn!("{kind}: forecast not converged within {} steps", fc.horizon);
        }
        if with_paths {
            out.csv(&format!("forecast_{}.csv", kind.slug()), |wr| path.write_csv(wr))?;
            rep.forecasts.push(ForecastEntry { path, convergence: conv });
        }
        out.csv(&format!("irf_{}.csv", kind.slug()), |wr| irf.write_csv(wr))?;
        let (peak_step, peak) = irf.peak();
        rep.irfs.push(IrfEntry {
            kind: *kind,
            shock,
            diff: irf.diff.clone(),
            peak_step,
            peak,
            baseline_convergence: convergence(&irf.baseline, cfg),
            shocked_convergence: convergence(&irf.shocked, cfg),
        });
    }
    rep.failures.extend(numerical);

    let steps: Vec<f64> = (1..=fc.horizon).map(|h| h as f64).collect();
    if with_paths && !rep.forecasts.is_empty() {
        let mut chart = LineChart::new(format!("Multi-step forecast from {}", rep.origin)).labels("step", "volatility");
        chart.x = steps.clone();
        for e in &rep.forecasts {
            chart = chart.series(e.path.kind.name(), e.path.mu.clone());
        }
        out.svg("forecast.svg", &chart.render())?;
    }
    if !rep.irfs.is_empty() {
        let mut chart = LineChart::new(format!("Impulse response, proxy shock {shock:.4}")).labels("step", "difference");
        chart.x = steps;
        chart.hline = Some(0.0);
        for e in &rep.irfs {
            chart = chart.series(e.kind.name(), e.diff.clone());
        }
        out.svg("irf.svg", &chart.render())?;
    }
    let name = if with_paths { "forecast" } else { "irf" };
    out.json(&format!("{name}.json"), &rep)?;
    out.text(&format!("{name}.txt"), &forecast_text(&rep))?;
    if rep.failures.is_empty() {
        Ok(())
    } else {
        let kinds: Vec<&str> = rep.failures.iter().map(|f| f.kind.name()).collect();
        Err(CliError::numerical(format!("forecasting failed for {}", kinds.join(", "))))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub split: NaiveDate,
    pub eval_start: NaiveDate,
    pub eval_end: NaiveDate,
    pub n_eval: usize,
    pub models: Vec<ModelKind>,
    pub mean_mse: Vec<f64>,
    pub mean_qlike: Vec<f64>,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub scheme: Scheme,
    pub splits: Vec<SplitSummary>,
}

fn oos_runs(cfg: &RunConfig, out: &mut Output) -> Result<(Vec<OosRun>, EvaluationReport), CliError> {
    if cfg.evaluation.splits.is_empty() {
        return Err(CliError::usage("no split dates; pass --splits or set evaluation.splits"));
    }
    let panel = load(cfg)?;
    let ev = &cfg.evaluation;
    let opts = OosOptions {
        fit: fit_options(cfg),
        scheme: match ev.scheme {
            Scheme::Fixed => EstimationScheme::Fixed,
            Scheme::Expanding => EstimationScheme::Expanding { refit_every: ev.refit_every },
        },
        min_eval_days: ev.min_eval_days,
        eval_end: ev.eval_end,
    };
    let mut runs = Vec::new();
    let mut rep = EvaluationReport { scheme: ev.scheme, splits: Vec::new() };
    for &split in &ev.splits {
        log::info!("out-of-sample run for split {split}");
        let run = oos_forecast_run(&cfg.estimation.models, &panel, split, &opts)?;
        for loss in [LossKind::Mse, LossKind::QLike] {
            let m = run.matrix(loss);
            out.csv(&format!("losses_{split}_{}.csv", loss.name().to_ascii_lowercase()), |wr| m.write_csv(wr))?;
        }
        let dates = panel.dates();
        rep.splits.push(SplitSummary {
            split,
            eval_start: dates[run.evaluation.start],
            eval_end: dates[run.evaluation.end - 1],
            n_eval: run.evaluation.len(),
            models: run.kinds.clone(),
            mean_mse: run.mse.mean_losses(),
            mean_qlike: run.qlike.mean_losses(),
            failures: run.failures.iter().map(|f| Failure { kind: f.kind, error: f.error.clone() }).collect(),
        });
        runs.push(run);
    }
    Ok((runs, rep))
}

fn evaluation_text(r: &EvaluationReport) -> String {
    let mut s = String::new();
    for sp in &r.splits {
        let header = ["", "MSE", "QLike"].map(String::from).to_vec();
        let mut t = TextTable::new(header).title(format!(
            "Out-of-sample losses, split {} (evaluation {} to {}, {} days)",
            sp.split, sp.eval_start, sp.eval_end, sp.n_eval
        ));
        for (i, k) in sp.models.iter().enumerate() {
            t.push(vec![k.name().into(), format!("{:.4}", sp.mean_mse[i]), format!("{:.5}", sp.mean_qlike[i])]);
        }
        for f in &sp.failures {
            t.notes.push(format!("{} failed: {}", f.kind, f.error));
        }
        s.push_str(&t.render());
        s.push('\n');
    }
    s
}

pub fn cmd_evaluate(cfg: &RunConfig) -> Result<(), CliError> {
    let mut out = Output::new(cfg)?;
    let (_, rep) = oos_runs(cfg, &mut out)?;
    out.json("evaluation.json", &rep)?;
    out.text("evaluation.txt", &evaluation_text(&rep))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsSplit {
    pub split: NaiveDate,
    pub results: Vec<McsResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsReport {
    pub evaluation: EvaluationReport,
    pub splits: Vec<McsSplit>,
}

fn mcs_text(r: &McsReport) -> String {
    let rows: Vec<McsGridRow<'_>> = r
        .splits
        .iter()
        .map(|s| McsGridRow {
            label: s.split.to_string(),
            mse: s.results.iter().find(|m| m.loss == LossKind::Mse),
            qlike: s.results.iter().find(|m| m.loss == LossKind::QLike),
        })
        .collect();
    let mut s = report::mcs_grid(&rows).render();
    for sp in &r.splits {
        for m in &sp.results {
            let header = ["", "mean loss", "p-value"].map(String::from).to_vec();
            let mut t = TextTable::new(header).title(format!("{} {} MCS p-values", sp.split, m.loss.name()));
            for (i, name) in m.models.iter().enumerate() {
                t.push(vec![name.clone(), format!("{:.5}", m.mean_losses[i]), format!("{:.4}", m.p_values[i])]);
            }
            s.push('\n');
            s.push_str(&t.render());
        }
    }
    s
}

pub fn cmd_mcs(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.estimation.models.len() < 2 {
        return Err(CliError::usage("the confidence set needs at least two models"));
    }
    let mut out = Output::new(cfg)?;
    let (runs, evaluation) = oos_runs(cfg, &mut out)?;
    let opts = McsOptions {
        level: cfg.mcs.level,
        replications: cfg.mcs.replications,
        block_length: cfg.mcs.block_length,
        seed: cfg.seed,
        parallel: true,
    };
    let mut splits = Vec::new();
    for run in &runs {
        let mut results = Vec::new();
        for &loss in &cfg.mcs.losses {
            results.push(model_confidence_set(run.matrix(loss), &opts)?);
        }
        splits.push(McsSplit { split: run.split, results });
    }
    let rep = McsReport { evaluation, splits };
    out.json("mcs.json", &rep)?;
    out.text("mcs.txt", &mcs_text(&rep))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub scenario: SimScenario,
    pub unconditional_mean: f64,
    pub mean_rv: f64,
    pub announcements: usize,
}

pub fn cmd_simulate(cfg: &RunConfig, dest: Option<&Path>) -> Result<(), CliError> {
    let sc = &cfg.simulate;
    let params = sc.params.unwrap_or_else(|| default_params(sc.kind)).restrict(sc.kind);
    let scenario = SimScenario {
        kind: sc.kind,
        params,
        t_len: sc.t_len,
        x: sc.x.clone(),
        announcements: if sc.announce_every == 0 { AnnouncementRule::None } else { AnnouncementRule::Every(sc.announce_every) },
        seed: cfg.seed,
        start_date: sc.start_date,
    };
    let sim = simulate_panel(&scenario)?;
    let mut out = Output::new(cfg)?;
    let panel_path = dest.map_or_else(|| out.dir().join("simulated.csv"), Path::to_path_buf);
    let file = std::fs::File::create(&panel_path)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", panel_path.display())))?;
    write_panel(&sim.panel, std::io::BufWriter::new(file))?;
    out.csv("simulated_components.csv", |wr| sim.truth.write_csv(sim.panel.dates(), wr))?;
    let rv = sim.panel.rv();
    let rep = SimulationReport {
        unconditional_mean: mapvol::model::unconditional_mean(sc.kind, &params)?,
        mean_rv: rv.iter().sum::<f64>() / rv.len() as f64,
        announcements: sim.panel.delta().iter().filter(|d| **d == 1).count(),
        scenario,
    };
    let chart = LineChart::new(format!("Simulated {} panel", sc.kind))
        .labels("day", "volatility")
        .series("realized", rv.to_vec())
        .series("expected", sim.truth.mu.clone());
    out.svg("simulated.svg", &chart.render())?;
    out.json("simulate.json", &rep)?;
    out.text(
        "simulate.txt",
        &format!(
            "Simulated {} days from {} (seed {}) to {}\nmean RV {:.4}, unconditional mean {:.4}, {} announcements\n",
            rep.scenario.t_len,
            rep.scenario.kind,
            rep.scenario.seed,
            panel_path.display(),
            rep.mean_rv,
            rep.unconditional_mean,
            rep.announcements
        ),
    )?;
    Ok(())
}

fn stylized_text(s: &AnnouncementStats) -> String {
    let header = ["", "before %", "after %"].map(String::from).to_vec();
    let mut t = TextTable::new(header).title(format!("Volatility around announcements, {}-day windows", s.window));
    for e in &s.events {
        t.push(vec![e.date.to_string(), format!("{:.1}", e.before_pct), format!("{:.1}", e.after_pct)]);
    }
    t.push(vec!["Average".into(), format!("{:.1}", s.mean_before_pct), format!("{:.1}", s.mean_after_pct)]);
    if s.skipped > 0 {
        t.notes.push(format!("Announcements at the sample edges skipped: {}.", s.skipped));
    }
    t.render()
}

pub fn cmd_stylized(cfg: &RunConfig) -> Result<(), CliError> {
    let panel = load(cfg)?;
    let w = window(cfg, &panel)?;
    let sub = panel.slice(w)?;
    let stats = announcement_window_stats(&sub, cfg.stylized.window)?;
    let mut out = Output::new(cfg)?;
    out.json("stylized.json", &stats)?;
    out.text("stylized.txt", &stylized_text(&stats))?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(p: &Path) -> Result<Option<T>, CliError> {
    match std::fs::read_to_string(p) {
        Ok(s) => Ok(Some(serde_json::from_str(&s)?)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(CliError::data(format!("cannot read {}: {e}", p.display()))),
    }
}

pub fn cmd_report(cfg: &RunConfig) -> Result<(), CliError> {
    let dir = &cfg.output_dir;
    let mut sections = Vec::new();
    if let Some(r) = read_json::<EstimatesReport>(&dir.join("estimates.json"))? {
        sections.push(estimates_text(&r));
    }
    if let Some(r) = read_json::<ForecastReport>(&dir.join("forecast.json"))? {
        sections.push(forecast_text(&r));
    } else if let Some(r) = read_json::<ForecastReport>(&dir.join("irf.json"))? {
        sections.push(forecast_text(&r));
    }
    if let Some(r) = read_json::<McsReport>(&dir.join("mcs.json"))? {
        sections.push(evaluation_text(&r.evaluation));
        sections.push(mcs_text(&r));
    } else if let Some(r) = read_json::<EvaluationReport>(&dir.join("evaluation.json"))? {
        sections.push(evaluation_text(&r));
    }
    if let Some(r) = read_json::<AnnouncementStats>(&dir.join("stylized.json"))? {
        sections.push(stylized_text(&r));
    }
    if sections.is_empty() {
        return Err(CliError::data(format!("no JSON artifacts found in {}", dir.display())));
    }
    let mut out = Output::new(cfg)?;
    out.text("report.txt", &sections.join("\n"))?;
    Ok(())
}
