#![allow(dead_code)]

use mapvol::model::{ModelKind, ParamSet};
use mapvol::simulate::{SimScenario, XRule};
use rand::Rng;

/// Magnitudes typical of daily annualized volatility estimates.
pub fn typical_params(kind: ModelKind) -> ParamSet {
    let p = match kind {
        ModelKind::Amem => ParamSet { omega: 0.857, alpha: 0.171, beta: 0.708, gamma: 0.113, delta: 0.0, phi: 0.0, psi: 0.0, theta: 7.559 },
        ModelKind::Xmap => ParamSet { omega: 1.136, alpha: 0.165, beta: 0.689, gamma: 0.120, delta: -0.636, phi: 1.297, psi: 0.0, theta: 7.728 },
        ModelKind::Map => ParamSet { omega: 1.056, alpha: 0.154, beta: 0.707, gamma: 0.117, delta: -1.836, phi: 2.817, psi: 0.111, theta: 7.817 },
        ModelKind::Lmap => ParamSet { omega: 1.011, alpha: 0.151, beta: 0.712, gamma: 0.119, delta: -0.297, phi: 0.464, psi: 0.194, theta: 7.827 },
        ModelKind::Pmap => ParamSet { omega: 1.025, alpha: 0.153, beta: 0.709, gamma: 0.119, delta: -0.161, phi: 0.231, psi: 0.134, theta: 7.820 },
    };
    p.restrict(kind)
}

pub fn scenario(kind: ModelKind, t_len: usize, seed: u64) -> SimScenario {
    let mut s = SimScenario::new(kind, typical_params(kind), t_len, seed);
    s.x = XRule::RandomWalk { start: 0.3, drift: 0.0, sd: 0.002 };
    s
}

/// A stationary draw satisfying `0 < psi < beta < 1`.
pub fn random_params<R: Rng>(rng: &mut R) -> ParamSet {
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
