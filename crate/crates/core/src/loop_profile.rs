//! The homoclinic loop on `q2 = 0` and the first two terms of the generating
//! function along it.
//!
//! `S0' = sqrt(-2 V0 / β)` with `β = det B0 / b220`, and
//! `S1 = -(b120 / b220) S0'`. The square root is extended oddly through the
//! equilibrium, and antiperiodically on the torus, which keeps it smooth.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{grid, HamiltonianModel};
use crate::numeric::diff;
use crate::numeric::ode::{self, Control, OdeOptions};
use crate::numeric::quad;

#[derive(Debug, Clone)]
pub struct LoopProfile {
    pub model: HamiltonianModel,
    /// `∫ S0' dq1` over one turn, periodic models only.
    pub sigma: Option<f64>,
    pub max_residual: f64,
    pub max_residual_at: f64,
}

fn branch_sign(periodic: bool, q: f64) -> f64 {
    if periodic {
        if (q / TAU).floor().rem_euclid(2.0) == 0.0 {
            1.0
        } else {
            -1.0
        }
    } else if q >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

impl LoopProfile {
    pub fn beta(&self, q: f64) -> f64 {
        let c = &self.model.coeffs;
        let b22 = c.b220.eval(q);
        let b12 = c.b120.eval(q);
        (c.b110.eval(q) * b22 - b12 * b12) / b22
    }

    fn radicand(&self, q: f64) -> f64 {
        -2.0 * self.model.coeffs.v0.eval(q) / self.beta(q)
    }

    /// `S0'`, positive on the loop itself.
    pub fn ds0(&self, q: f64) -> f64 {
        branch_sign(self.model.periodic, q) * self.radicand(q).max(0.0).sqrt()
    }

    pub fn d2s0(&self, q: f64) -> f64 {
        match &self.model.loop_hint {
            Some(h) if h.ds0.has_derivative() => h.ds0.derivative(q),
            _ => diff::derivative(&|x| self.ds0(x), q, diff::first_step(q)),
        }
    }

    pub fn s1(&self, q: f64) -> f64 {
        let c = &self.model.coeffs;
        -c.b120.eval(q) / c.b220.eval(q) * self.ds0(q)
    }

    pub fn ds1(&self, q: f64) -> f64 {
        match &self.model.loop_hint {
            Some(h) if h.s1.has_derivative() => h.s1.derivative(q),
            _ => diff::derivative(&|x| self.s1(x), q, diff::first_step(q)),
        }
    }

    /// Inner dynamics on the loop, `q1' = β S0'`.
    pub fn velocity(&self, q: f64) -> f64 {
        self.beta(q) * self.ds0(q)
    }

    /// `S1' β S0' + V1`, zero when the loop is compatible with `V1`.
    pub fn restriction_residual(&self, q: f64) -> f64 {
        self.ds1(q) * self.velocity(q) + self.model.coeffs.v1.eval(q)
    }
}

/// Build the loop profile, checking the radicand and the restriction.
pub fn loop_profile(model: &HamiltonianModel) -> Result<LoopProfile> {
    const N: usize = 256;
    let mut p = LoopProfile { model: model.clone(), sigma: None, max_residual: 0.0, max_residual_at: 0.0 };
    let end = model.loop_end();
    let pts: Vec<f64> = grid(0.0, end, N + 2).into_iter().skip(1).take(N).collect();
    for &q in &pts {
        let r = p.radicand(q);
        if r.is_nan() || r < -1e-12 * (1.0 + model.coeffs.v0.eval(q).abs()) {
            return Err(Error::NoLoop { q, radicand: r });
        }
    }
    let scale = pts.iter().map(|&q| model.coeffs.v1.eval(q).abs()).fold(1.0, f64::max);
    for &q in &pts {
        let r = p.restriction_residual(q).abs();
        if r > p.max_residual || r.is_nan() {
            p.max_residual = r;
            p.max_residual_at = q;
        }
    }
    if !(p.max_residual <= 1e-6 * scale) {
        return Err(Error::InconsistentV1 { q: p.max_residual_at, residual: p.max_residual });
    }
    if let Some(h) = &model.loop_hint {
        for &q in &pts {
            let (a, b) = (p.ds0(q), h.ds0.eval(q));
            if (a - b).abs() > 1e-8 * (1.0 + b.abs()) {
                return Err(Error::Construction(format!("supplied loop disagrees with sqrt(-2 V0/β) at q1 = {q}: {b} vs {a}")));
            }
        }
    }
    if model.periodic {
        p.sigma = Some(quad::simpson(|q| p.ds0(q), 0.0, TAU, 1e-13, 50));
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InnerTime {
    pub q1: f64,
    /// Set when the flow left the model domain before time `t`.
    pub clipped: bool,
}

/// Flow the inner dynamics for time `t` (either sign) from `q1_start`.
pub fn inner_time_param(profile: &LoopProfile, q1_start: f64, t: f64) -> Result<InnerTime> {
    let m = &profile.model;
    m.check_domain(q1_start)?;
    let (lo, hi) = m.domain;
    let opts = OdeOptions { rtol: 1e-11, atol: 1e-13, ..Default::default() };
    let tr = ode::integrate(
        |_, y: &[f64; 1]| [profile.velocity(y[0].clamp(lo, hi))],
        0.0,
        [q1_start],
        t,
        &opts,
        |_, y| if m.in_domain(y[0]) { Control::Continue } else { Control::Stop },
    )?;
    if tr.stopped {
        Ok(InnerTime { q1: tr.y[0].clamp(lo, hi), clipped: true })
    } else {
        Ok(InnerTime { q1: tr.y[0], clipped: false })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{neumann, pendula_identical};

    #[test]
    fn sign_extension() {
        assert_eq!(branch_sign(true, 1.0), 1.0);
        assert_eq!(branch_sign(true, -1.0), -1.0);
        assert_eq!(branch_sign(true, 7.0), -1.0);
        assert_eq!(branch_sign(false, -1.0), -1.0);
    }

    #[test]
    fn pendula_profile_closed_form() {
        let p = loop_profile(&pendula_identical(&[0.0]).unwrap().model).unwrap();
        for q in [0.3, 1.0, 3.0, 5.5] {
            assert!((p.ds0(q) - 4.0 * (0.5 * q).sin()).abs() < 1e-13);
            assert!((p.s1(q) - 2.0 * (0.5 * q).sin()).abs() < 1e-13);
            assert!((p.beta(q) - 0.5).abs() < 1e-15);
        }
        assert!((p.sigma.unwrap() - 16.0).abs() < 1e-10);
    }

    #[test]
    fn neumann_inner_flow_is_exponential() {
        let p = loop_profile(&neumann(1.0, 2.0).unwrap().model).unwrap();
        let r = inner_time_param(&p, 2.0, 1.0).unwrap();
        assert!(!r.clipped);
        assert!((r.q1 - 2.0 * 1f64.exp()).abs() < 1e-9);
        let back = inner_time_param(&p, 2.0, -3.0).unwrap();
        assert!((back.q1 - 2.0 * (-3f64).exp()).abs() < 1e-10);
        assert!(inner_time_param(&p, 2.0, 10.0).unwrap().clipped);
    }
}
