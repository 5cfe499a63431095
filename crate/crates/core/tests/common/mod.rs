#![allow(dead_code)]

//! Closed forms and a crude independent integrator used as test oracles.

use std::f64::consts::PI;

/// Unstable curvature for the Neumann problem.
pub fn neumann_tu(l1: f64, l2: f64, q: f64) -> f64 {
    let w = q * q + 4.0;
    let num = -(16.0 * l2 * l2 + 16.0 * l1 * l2) * w + 32.0 * l1 * l1 * q * q;
    let den = w * w * ((l1 - l2) * q * q - 4.0 * l1 - 4.0 * l2);
    num / den
}

pub fn neumann_tu_at_2(l1: f64, l2: f64) -> f64 {
    0.25 * (l2 + l1 - l1 * l1 / l2)
}

/// `T^u - T̂^s` at `q1 = 2`.
pub fn neumann_gap(l1: f64, l2: f64) -> f64 {
    2.0 * neumann_tu_at_2(l1, l2) - 0.5 * l1
}

/// `T̄(x)` for identical pendula with constant coupling, `b² = 1 - 2f`.
pub fn pendula_tbar(b: f64, x: f64) -> f64 {
    b - (1.0 - x * x) / (b - x)
}

/// `x = -cos(q1/2)`.
pub fn pendula_x(q: f64) -> f64 {
    -(0.5 * q).cos()
}

pub fn pendula_q(x: f64) -> f64 {
    2.0 * (-x).acos()
}

/// Reduced Mel'nikov potential for equal frequencies.
pub fn melnikov_equal(s: f64) -> f64 {
    let th = (0.5 * s).tanh();
    -4.0 * th * (s / (0.5 * s).cosh().powi(2) + 2.0 * th)
}

/// Identical pendula in raw form, written out independently of the crate:
/// `2 sin(q/2) T' - 2 cos(q/2) T + 2T² = -(sin²(q/2) + f(q))`.
pub fn pendula_rhs(f: &[f64], q: f64, t: f64) -> f64 {
    let fq: f64 = f.iter().enumerate().map(|(k, a)| a * (k as f64 * q).cos()).sum();
    let s = (0.5 * q).sin();
    (-(s * s + fq) + 2.0 * (0.5 * q).cos() * t - 2.0 * t * t) / (2.0 * s)
}

/// Fixed-step RK4 in `u = ln q`, where the singular start is regular.
pub fn rk4_log<F: Fn(f64, f64) -> f64>(rhs: F, q0: f64, t0: f64, q1: f64, n: usize) -> f64 {
    let g = |u: f64, t: f64| {
        let q = u.exp();
        q * rhs(q, t)
    };
    let (u0, u1) = (q0.ln(), q1.ln());
    let h = (u1 - u0) / n as f64;
    let mut t = t0;
    for k in 0..n {
        let u = u0 + k as f64 * h;
        let k1 = g(u, t);
        let k2 = g(u + 0.5 * h, t + 0.5 * h * k1);
        let k3 = g(u + 0.5 * h, t + 0.5 * h * k2);
        let k4 = g(u + h, t + h * k3);
        t += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    t
}

/// `T^u(π)` for identical pendula with coupling `f`, by [`rk4_log`].
pub fn pendula_tu_pi(f: &[f64]) -> f64 {
    let f0: f64 = f.iter().sum();
    let b = (1.0 - 2.0 * f0).sqrt();
    rk4_log(|q, t| pendula_rhs(f, q, t), 1e-7, 0.5 * (1.0 + b), PI, 20_000)
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}
