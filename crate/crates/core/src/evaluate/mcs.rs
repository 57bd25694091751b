//! Model Confidence Set with the range statistic and a stationary bootstrap.
//!
//! At each round the pairwise mean loss differentials of the surviving models
//! are standardized by their bootstrap standard deviations. The largest
//! absolute standardized differential is the test statistic; its bootstrap
//! distribution uses the recentred resampled differentials. When equivalence
//! is rejected, the model with the largest standardized excess loss leaves
//! the set. MCS p-values are the running maximum of the round p-values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{LossKind, LossMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McsOptions {
    pub level: f64,
    pub replications: usize,
    /// Mean block length of the stationary bootstrap.
    pub block_length: f64,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for McsOptions {
    fn default() -> Self {
        Self { level: 0.10, replications: 5000, block_length: 22.0, seed: 0, parallel: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsResult {
    pub loss: LossKind,
    pub statistic: String,
    pub models: Vec<String>,
    pub mean_losses: Vec<f64>,
    /// MCS p-value per model, in `models` order.
    pub p_values: Vec<f64>,
    /// Models in the order they left the set; the last entry never leaves.
    pub elimination_order: Vec<String>,
    pub survivors: Vec<String>,
    pub best: String,
    pub level: f64,
    pub replications: usize,
    pub block_length: f64,
    pub seed: u64,
    pub tie_break: String,
}

impl McsResult {
    pub fn contains(&self, model: &str) -> bool {
        self.survivors.iter().any(|m| m == model)
    }

    /// Survivors at another level, reusing the same p-values.
    pub fn survivors_at(&self, level: f64) -> Vec<String> {
        self.models
            .iter()
            .zip(&self.p_values)
            .filter(|(_, p)| **p > level)
            .map(|(m, _)| m.clone())
            .collect()
    }

    pub fn p_value(&self, model: &str) -> Option<f64> {
        self.models.iter().position(|m| m == model).map(|i| self.p_values[i])
    }
}

/// Stationary bootstrap indices: blocks start uniformly and have geometric
/// lengths with the given mean; the series wraps around.
pub fn stationary_bootstrap_indices<R: Rng>(n: usize, mean_block: f64, rng: &mut R) -> Vec<usize> {
    let p_new = 1.0 / mean_block.max(1.0);
    let mut idx = Vec::with_capacity(n);
    let mut cur = rng.random_range(0..n);
    idx.push(cur);
    for _ in 1..n {
        cur = if rng.random::<f64>() < p_new { rng.random_range(0..n) } else { (cur + 1) % n };
        idx.push(cur);
    }
    idx
}

/// Bootstrap means of every column, one row per replication.
fn bootstrap_means(l: &LossMatrix, opts: &McsOptions) -> Vec<Vec<f64>> {
    let n = l.n_obs();
    let one = |b: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(b as u64);
        let idx = stationary_bootstrap_indices(n, opts.block_length, &mut rng);
        l.columns().iter().map(|c| idx.iter().map(|&t| c[t]).sum::<f64>() / n as f64).collect::<Vec<f64>>()
    };
    if opts.parallel {
        (0..opts.replications).into_par_iter().map(one).collect()
    } else {
        (0..opts.replications).map(one).collect()
    }
}

pub fn model_confidence_set(l: &LossMatrix, opts: &McsOptions) -> Result<McsResult> {
    let m = l.n_models();
    if m < 2 {
        return Err(Error::arg("MCS needs at least two models"));
    }
    if l.n_obs() < 100 {
        return Err(Error::arg(format!("MCS needs at least 100 evaluation days, got {}", l.n_obs())));
    }
    if opts.replications == 0 || !(opts.level > 0.0 && opts.level < 1.0) {
        return Err(Error::arg("MCS needs replications > 0 and a level in (0, 1)"));
    }
    let means = l.mean_losses();
    let boot = bootstrap_means(l, opts);
    let b = boot.len() as f64;

    // pairwise bootstrap standard deviations of the mean differentials
    let mut sd = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..i {
            let d = means[i] - means[j];
            let v = boot.iter().map(|r| (r[i] - r[j] - d).powi(2)).sum::<f64>() / b;
            sd[i][j] = v.sqrt();
            sd[j][i] = sd[i][j];
        }
    }
    // scale for deciding that a differential is numerically zero
    let scale = means.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let tstat = |i: usize, j: usize, d: f64| -> f64 {
        if sd[i][j] > 1e-14 * scale {
            d / sd[i][j]
        } else if d.abs() <= 1e-14 * scale {
            0.0
        } else {
            d.signum() * f64::INFINITY
        }
    };

    let mut alive: Vec<usize> = (0..m).collect();
    let mut p_values = vec![1.0; m];
    let mut order = Vec::with_capacity(m);
    let mut running = 0.0f64;
    while alive.len() > 1 {
        let mut t_range = 0.0f64;
        let mut worst = alive[0];
        let mut worst_score = f64::NEG_INFINITY;
        for &i in &alive {
            let mut score = f64::NEG_INFINITY;
            for &j in &alive {
                if i == j {
                    continue;
                }
                let t = tstat(i, j, means[i] - means[j]);
                t_range = t_range.max(t.abs());
                score = score.max(t);
            }
            // strict comparison keeps the earliest model on ties
            if score > worst_score {
                worst_score = score;
                worst = i;
            }
        }
        let p = if t_range == 0.0 {
            1.0
        } else if t_range.is_infinite() {
            0.0
        } else {
            let exceed = boot
                .iter()
                .filter(|r| {
                    let mut mx = 0.0f64;
                    for (ai, &i) in alive.iter().enumerate() {
                        for &j in &alive[..ai] {
                            if sd[i][j] > 1e-14 * scale {
                                let centred = (r[i] - r[j]) - (means[i] - means[j]);
                                mx = mx.max(centred.abs() / sd[i][j]);
                            }
                        }
                    }
                    mx >= t_range
                })
                .count();
            exceed as f64 / b
        };
        running = running.max(p);
        p_values[worst] = running;
        order.push(worst);
        alive.retain(|&i| i != worst);
    }
    let last = alive[0];
    p_values[last] = 1.0;
    order.push(last);

    let models = l.models.clone();
    let survivors =
        (0..m).filter(|&i| p_values[i] > opts.level).map(|i| models[i].clone()).collect::<Vec<_>>();
    Ok(McsResult {
        loss: l.loss,
        statistic: "range".into(),
        mean_losses: means,
        p_values,
        elimination_order: order.iter().map(|&i| models[i].clone()).collect(),
        survivors,
        best: models[last].clone(),
        models,
        level: opts.level,
        replications: opts.replications,
        block_length: opts.block_length,
        seed: opts.seed,
        tie_break: "model enumeration order".into(),
    })
}
