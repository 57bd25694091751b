//! Aligned plain-text tables for estimation, comparison, marginal-effect and
//! MCS results.

use std::fmt::Write as _;

use crate::estimate::EstimationResult;
use crate::evaluate::McsResult;
use crate::forecast::MarginalEffect;
use crate::model::Param;

/// A grid of cells rendered with the first column left-aligned and the rest
/// right-aligned.
#[derive(Debug, Clone, Default)]
pub struct TextTable {
    pub title: Option<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub notes: Vec<String>,
}

impl TextTable {
    pub fn new(header: Vec<String>) -> Self {
        Self { header, ..Default::default() }
    }

    pub fn title(mut self, t: impl Into<String>) -> Self {
        self.title = Some(t.into());
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let ncol = self.header.len().max(self.rows.iter().map(Vec::len).max().unwrap_or(0));
        let mut width = vec![0usize; ncol];
        for row in std::iter::once(&self.header).chain(&self.rows) {
            for (i, c) in row.iter().enumerate() {
                width[i] = width[i].max(c.chars().count());
            }
        }
        let total = width.iter().sum::<usize>() + 2 * ncol.saturating_sub(1);
        let line = |out: &mut String, row: &[String]| {
            let mut s = String::new();
            for (i, w) in width.iter().enumerate() {
                let c = row.get(i).map_or("", String::as_str);
                let pad = w - c.chars().count();
                if i > 0 {
                    s.push_str("  ");
                }
                if i == 0 {
                    s.push_str(c);
                    s.push_str(&" ".repeat(pad));
                } else {
                    s.push_str(&" ".repeat(pad));
                    s.push_str(c);
                }
            }
            out.push_str(s.trim_end());
            out.push('\n');
        };
        let mut out = String::new();
        if let Some(t) = &self.title {
            out.push_str(t);
            out.push('\n');
        }
        let rule = "-".repeat(total);
        out.push_str(&rule);
        out.push('\n');
        line(&mut out, &self.header);
        out.push_str(&rule);
        out.push('\n');
        for r in &self.rows {
            line(&mut out, r);
        }
        out.push_str(&rule);
        out.push('\n');
        for n in &self.notes {
            out.push_str(n);
            out.push('\n');
        }
        out
    }
}

fn num(v: f64, digits: usize) -> String {
    if v.is_finite() {
        format!("{v:.digits$}")
    } else {
        "-".into()
    }
}

const PARAM_ROWS: [(Param, &str); 8] = [
    (Param::Omega, "omega"),
    (Param::Alpha, "alpha"),
    (Param::Beta, "beta"),
    (Param::Gamma, "gamma"),
    (Param::Delta, "delta"),
    (Param::Phi, "phi"),
    (Param::Psi, "psi"),
    (Param::Theta, "theta"),
];

/// Coefficients with robust standard errors in parentheses, one column per
/// model, followed by log-likelihood and Ljung-Box p-values.
pub fn estimation_table(results: &[EstimationResult]) -> TextTable {
    let mut header = vec![String::new()];
    header.extend(results.iter().map(|r| r.kind.name().to_string()));
    let mut t = TextTable::new(header).title("Coefficient estimates (robust s.e. in parentheses)");
    for (param, label) in PARAM_ROWS {
        if !results.iter().any(|r| r.estimate(param).is_some()) {
            continue;
        }
        let mut est = vec![label.to_string()];
        let mut se = vec![String::new()];
        for r in results {
            match r.estimate(param) {
                Some(e) => {
                    est.push(num(e.value, 3));
                    se.push(e.robust_se.map_or("(-)".into(), |s| format!("({})", num(s, 3))));
                }
                None => {
                    est.push(String::new());
                    se.push(String::new());
                }
            }
        }
        t.push(est);
        t.push(se);
    }
    let mut ll = vec!["Loglik".to_string()];
    ll.extend(results.iter().map(|r| num(r.loglik, 1)));
    t.push(ll);
    let lags: Vec<usize> = results.first().map(|r| r.ljung_box.iter().map(|l| l.lag).collect()).unwrap_or_default();
    for (i, lag) in lags.iter().enumerate() {
        let mut row = vec![format!("LB p-value lag {lag}")];
        row.extend(results.iter().map(|r| r.ljung_box.get(i).map_or("-".into(), |l| num(l.p_value, 3))));
        t.push(row);
    }
    let mut n = vec!["Obs".to_string()];
    n.extend(results.iter().map(|r| r.nobs.to_string()));
    t.push(n);
    for r in results {
        if let Some(e) = &r.convergence.se_error {
            t.notes.push(format!("{}: standard errors unavailable ({e})", r.kind));
        }
        if r.params.gamma < 0.0 {
            t.notes.push(format!("{}: negative asymmetry coefficient", r.kind));
        }
    }
    t
}

/// Information criteria, in-sample losses and persistence per model.
pub fn comparison_table(results: &[EstimationResult]) -> TextTable {
    let header = ["", "AIC", "BIC", "MSE", "QLike", "Persistence"].map(String::from).to_vec();
    let mut t = TextTable::new(header).title("Model comparison");
    for r in results {
        t.push(vec![
            r.kind.name().to_string(),
            num(r.aic, 3),
            num(r.bic, 3),
            num(r.mse, 3),
            num(r.qlike, 4),
            num(r.persistence, 3),
        ]);
    }
    t
}

/// Average marginal effects, one row per model and column per
/// (variable, horizon) pair in order of appearance.
pub fn marginal_effects_table(effects: &[MarginalEffect]) -> TextTable {
    let mut cols: Vec<(&str, usize)> = Vec::new();
    let mut kinds = Vec::new();
    for e in effects {
        let c = (e.variable.name(), e.tau);
        if !cols.contains(&c) {
            cols.push(c);
        }
        if !kinds.contains(&e.kind) {
            kinds.push(e.kind);
        }
    }
    let mut header = vec![String::new()];
    header.extend(cols.iter().map(|(v, tau)| format!("{v} tau={tau}")));
    let mut t = TextTable::new(header).title("Average marginal effects");
    for k in kinds {
        let mut row = vec![k.name().to_string()];
        for (v, tau) in &cols {
            let cell = effects
                .iter()
                .find(|e| e.kind == k && e.variable.name() == *v && e.tau == *tau)
                .map_or(String::new(), |e| num(e.value, 3));
            row.push(cell);
        }
        t.push(row);
    }
    t
}

/// One labelled row of the MCS grid with the results for both losses.
#[derive(Debug, Clone)]
pub struct McsGridRow<'a> {
    pub label: String,
    pub mse: Option<&'a McsResult>,
    pub qlike: Option<&'a McsResult>,
}

/// Membership grid: MSE members `□`, best `■`; QLike members `○`, best `●`.
pub fn mcs_grid(rows: &[McsGridRow<'_>]) -> TextTable {
    let mut models: Vec<String> = Vec::new();
    for r in rows {
        for m in r.mse.iter().chain(r.qlike.iter()).flat_map(|x| x.models.iter()) {
            if !models.contains(m) {
                models.push(m.clone());
            }
        }
    }
    let mut header = vec![String::new()];
    header.extend(models.iter().cloned());
    let level = rows.iter().find_map(|r| r.mse.or(r.qlike)).map_or(0.10, |m| m.level);
    let mut t = TextTable::new(header).title(format!("Model Confidence Set, level {}%", num(level * 100.0, 0)));
    for r in rows {
        let mut row = vec![r.label.clone()];
        for m in &models {
            let mut cell = String::new();
            let mark = |res: Option<&McsResult>, member: char, best: char, cell: &mut String| {
                if let Some(res) = res {
                    if res.best == *m {
                        cell.push(best);
                    } else if res.contains(m) {
                        cell.push(member);
                    }
                }
            };
            mark(r.mse, '□', '■', &mut cell);
            mark(r.qlike, '○', '●', &mut cell);
            row.push(cell);
        }
        t.push(row);
    }
    t.notes.push("MSE: □ member, ■ best.  QLike: ○ member, ● best.".into());
    if let Some(res) = rows.iter().find_map(|r| r.mse.or(r.qlike)) {
        let _ = write!(
            t.notes.last_mut().expect("note pushed"),
            "  Range statistic, stationary bootstrap (B={}, mean block {}, seed {}).",
            res.replications,
            res.block_length,
            res.seed
        );
    }
    t
}
