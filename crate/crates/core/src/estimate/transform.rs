//! Map between natural parameters and an unconstrained vector.
//!
//! Layout of the unconstrained vector, in order:
//! `ln omega`, `logit(persistence)`, two log-ratios placing `alpha`, `beta`
//! and `gamma/2` on the persistence simplex, then `delta`, `phi` (policy
//! kinds), the `psi` coordinate (component kinds) and `ln theta`.

use crate::error::{Error, Result};
use crate::model::{logistic, ModelKind, ParamSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transform {
    pub kind: ModelKind,
    /// `psi = beta * logistic(u)` when set, `psi = tanh(u)` otherwise.
    pub psi_below_beta: bool,
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

impl Transform {
    pub fn new(kind: ModelKind) -> Self {
        Self { kind, psi_below_beta: true }
    }

    pub fn dim(&self) -> usize {
        self.kind.n_free()
    }

    pub fn to_natural(&self, u: &[f64]) -> ParamSet {
        let pers = logistic(u[1]);
        let m = u[2].max(u[3]).max(0.0);
        let (ea, eb, eg) = ((u[2] - m).exp(), (u[3] - m).exp(), (-m).exp());
        let z = ea + eb + eg;
        let mut p = ParamSet::amem(u[0].exp(), pers * ea / z, pers * eb / z, 2.0 * pers * eg / z, 1.0);
        let mut i = 4;
        if self.kind.has_policy() {
            p.delta = u[4];
            p.phi = u[5];
            i = 6;
        }
        if self.kind.is_component() {
            p.psi = if self.psi_below_beta { p.beta * logistic(u[i]) } else { u[i].tanh() };
            i += 1;
        }
        p.theta = u[i].exp();
        p.restrict(self.kind)
    }

    /// Inverse of [`Transform::to_natural`]; needs an interior point.
    pub fn to_unconstrained(&self, p: &ParamSet) -> Result<Vec<f64>> {
        let half_gamma = 0.5 * p.gamma;
        let pers = p.persistence();
        if !(p.omega > 0.0 && p.alpha > 0.0 && p.beta > 0.0 && half_gamma > 0.0 && pers < 1.0 && p.theta > 0.0) {
            return Err(Error::Constraint(format!("point not interior to the transformed region: {p:?}")));
        }
        let mut u = vec![p.omega.ln(), logit(pers), (p.alpha / half_gamma).ln(), (p.beta / half_gamma).ln()];
        if self.kind.has_policy() {
            u.push(p.delta);
            u.push(p.phi);
        }
        if self.kind.is_component() {
            if self.psi_below_beta {
                let r = p.psi / p.beta;
                if !(r > 0.0 && r < 1.0) {
                    return Err(Error::Constraint(format!("psi = {} must lie in (0, beta = {})", p.psi, p.beta)));
                }
                u.push(logit(r));
            } else {
                if !(p.psi.abs() < 1.0) {
                    return Err(Error::Constraint(format!("|psi| = {} must be below 1", p.psi)));
                }
                u.push(p.psi.atanh());
            }
        }
        u.push(p.theta.ln());
        Ok(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn natural_point_is_feasible() {
        for kind in ModelKind::ALL {
            let t = Transform::new(kind);
            let u = vec![3.0; t.dim()];
            let p = t.to_natural(&u);
            assert!(p.check_constraints(kind).is_ok(), "{kind}: {p:?}");
        }
    }

    #[test]
    fn boundary_point_rejected() {
        let t = Transform::new(ModelKind::Amem);
        assert!(t.to_unconstrained(&ParamSet::amem(1.0, 0.3, 0.7, 0.1, 5.0)).is_err());
        assert!(t.to_unconstrained(&ParamSet::amem(1.0, 0.3, 0.5, 0.0, 5.0)).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(omega in 0.01f64..10.0, a in 0.01f64..0.4, b in 0.05f64..0.9, g in 0.002f64..0.3,
                      delta in -3.0f64..3.0, phi in -3.0f64..3.0, psi_frac in 0.01f64..0.99, theta in 0.5f64..50.0,
                      k in 0usize..5, constrained in proptest::bool::ANY) {
            prop_assume!(a + b + g / 2.0 < 0.999);
            let kind = ModelKind::ALL[k];
            let psi = if constrained { psi_frac * b } else { 2.0 * psi_frac - 1.0 };
            let p = ParamSet { omega, alpha: a, beta: b, gamma: g, delta, phi, psi, theta }.restrict(kind);
            let t = Transform { kind, psi_below_beta: constrained };
            let q = t.to_natural(&t.to_unconstrained(&p).unwrap());
            for param in kind.free_params() {
                let (x, y) = (p.get(*param), q.get(*param));
                prop_assert!(rel(y, x) < 1e-12 || (x - y).abs() < 1e-14, "{:?}: {} vs {}", param, x, y);
            }
        }
    }
}
