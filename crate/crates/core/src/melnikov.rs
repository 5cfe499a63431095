//! First-order persistence of homoclinic loops under a perturbation
//! `H = H0 + μ H*`.
//!
//! The Mel'nikov potential of a point `q` on the separatrix is
//! `L(q) = -∫ [H*(x(t, q)) - H*(O)] dt`, and on a family of loops
//! `x̄(t, s)` it reduces to `L̃(s)`. A loop whose manifolds already cross
//! transversally survives as is; a loop inside a coinciding family survives
//! where `L̃` has a nondegenerate critical point.

use std::f64::consts::PI;

use serde::Serialize;

use crate::chart::{TransversalityReport, Verdict};
use crate::error::{Error, Result};
use crate::model::PerturbationModel;
use crate::numeric::ode::{self, Control, DenseOutput, OdeOptions};
use crate::numeric::quad::gauss_kronrod;
use crate::numeric::roots::bisect;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MelnikovOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    /// Fixed half-width of the time window; `None` sizes it from the decay rate.
    pub t_cut: Option<f64>,
    /// `|L̃'(0)|` below this (times scale) counts as a critical point.
    pub critical_tol: f64,
    /// `|L̃''(0)|` above this (times scale) counts as nondegenerate.
    pub nondegenerate_tol: f64,
}

impl Default for MelnikovOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 4000, t_cut: None, critical_tol: 1e-8, nondegenerate_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MelnikovValue {
    pub value: f64,
    pub error: f64,
    pub t_cut: f64,
    /// Size of the integrand at the window edges times its decay length.
    pub tail_bound: f64,
    /// Quadrature met its tolerance.
    pub converged: bool,
    pub warning: Option<String>,
}

const TAIL_TARGET: f64 = 1e-14;

fn window(pert: &PerturbationModel, s: f64, opts: &MelnikovOptions) -> f64 {
    opts.t_cut.unwrap_or((40.0 + s.abs() * pert.time_scale) / pert.decay_rate)
}

/// Integrate `g` over `[-T, T]`, widening `T` while the edges are not yet
/// negligible (unless the window was fixed by the caller).
fn windowed<F: Fn(f64) -> f64>(g: F, mut t_cut: f64, fixed: bool, decay: f64, opts: &MelnikovOptions) -> MelnikovValue {
    let edge = |t: f64| g(-t).abs().max(g(t).abs()) / (2.0 * decay);
    let mut tail = edge(t_cut);
    while !fixed && tail > TAIL_TARGET && t_cut < 1e3 {
        t_cut *= 1.5;
        tail = edge(t_cut);
    }
    let r = gauss_kronrod(&g, -t_cut, t_cut, opts.abs_tol, opts.rel_tol, opts.max_intervals);
    let mut warning = None;
    if tail > TAIL_TARGET {
        warning = Some(format!("tail bound {tail:e} above {TAIL_TARGET:e}; result truncated"));
    }
    if !r.converged {
        warning = Some(format!("quadrature error estimate {:e} above tolerance", r.error));
    }
    MelnikovValue { value: r.value, error: r.error, t_cut, tail_bound: tail, converged: r.converged, warning }
}

/// `L̃(s) = -∫ [H*(x̄(t, s)) - H*(O)] dt`.
pub fn reduced_value(pert: &PerturbationModel, s: f64, opts: &MelnikovOptions) -> MelnikovValue {
    let h0 = pert.h_star_origin();
    let g = |t: f64| -((pert.h_star)(&(pert.loop_family)(t, s)) - h0);
    windowed(g, window(pert, s, opts), opts.t_cut.is_some(), pert.decay_rate, opts)
}

/// `L̃` on a grid of `s`.
pub fn reduced_melnikov(pert: &PerturbationModel, s_grid: &[f64], opts: &MelnikovOptions) -> Vec<(f64, MelnikovValue)> {
    s_grid.iter().map(|&s| (s, reduced_value(pert, s, opts))).collect()
}

fn trace(pert: &PerturbationModel, q: [f64; 2], t_end: f64) -> Result<DenseOutput<2>> {
    let sep = pert.separatrix.as_ref().expect("checked by caller");
    let o = OdeOptions { rtol: 1e-12, atol: 1e-14, ..Default::default() };
    let tr = ode::integrate(|_, y: &[f64; 2]| sep.velocity(*y), 0.0, q, t_end, &o, |_, _| Control::Continue)?;
    Ok(tr.dense)
}

/// `L(q)` for a point `q` on the separatrix. The loop through `q` is traced
/// with the inner dynamics rather than taken from the family.
pub fn melnikov_potential(pert: &PerturbationModel, q: [f64; 2], opts: &MelnikovOptions) -> Result<MelnikovValue> {
    let sep = pert
        .separatrix
        .as_ref()
        .ok_or_else(|| Error::Unsupported("melnikov_potential needs the separatrix inner dynamics".into()))?;
    let h0 = pert.h_star_origin();
    let mut t_cut = window(pert, 0.0, opts);
    loop {
        let fwd = trace(pert, q, t_cut)?;
        let bwd = trace(pert, q, -t_cut)?;
        let g = |t: f64| {
            let d = if t >= 0.0 { &fwd } else { &bwd };
            let y = d.eval(t.clamp(-t_cut, t_cut)).unwrap_or([f64::NAN; 2]);
            let p = sep.momentum(y);
            -((pert.h_star)(&[y[0], y[1], p[0], p[1]]) - h0)
        };
        let tail = g(-t_cut).abs().max(g(t_cut).abs()) / (2.0 * pert.decay_rate);
        if tail <= TAIL_TARGET || opts.t_cut.is_some() || t_cut > 1e3 {
            let left = gauss_kronrod(g, -t_cut, 0.0, 0.5 * opts.abs_tol, opts.rel_tol, opts.max_intervals);
            let right = gauss_kronrod(g, 0.0, t_cut, 0.5 * opts.abs_tol, opts.rel_tol, opts.max_intervals);
            let warning = if tail > TAIL_TARGET {
                Some(format!("tail bound {tail:e} above {TAIL_TARGET:e}; result truncated"))
            } else if !(left.converged && right.converged) {
                Some("quadrature error estimate above tolerance".into())
            } else {
                None
            };
            return Ok(MelnikovValue {
                value: left.value + right.value,
                error: left.error + right.error,
                t_cut,
                tail_bound: tail,
                converged: left.converged && right.converged,
                warning,
            });
        }
        t_cut *= 1.5;
    }
}

/// `(L̃'(0), L̃''(0))`, from the analytic integrands when the model has them
/// and otherwise from Richardson-extrapolated central differences.
pub fn melnikov_derivatives(pert: &PerturbationModel, opts: &MelnikovOptions) -> (f64, f64) {
    match &pert.family_derivatives {
        Some(d) => {
            let d1 = windowed(|t| d(t, 0.0).0, window(pert, 0.0, opts), opts.t_cut.is_some(), pert.decay_rate, opts);
            let d2 = windowed(|t| d(t, 0.0).1, window(pert, 0.0, opts), opts.t_cut.is_some(), pert.decay_rate, opts);
            (d1.value, d2.value)
        }
        None => finite_difference_derivatives(pert, 0.0, opts),
    }
}

/// Five-point central differences in `s`, step `1e-3` and its half.
pub fn finite_difference_derivatives(pert: &PerturbationModel, s: f64, opts: &MelnikovOptions) -> (f64, f64) {
    let l = |x: f64| reduced_value(pert, x, opts).value;
    let stencil = |h: f64| {
        let (m2, m1, z, p1, p2) = (l(s - 2.0 * h), l(s - h), l(s), l(s + h), l(s + 2.0 * h));
        ((m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h), (-m2 + 16.0 * m1 - 30.0 * z + 16.0 * p1 - p2) / (12.0 * h * h))
    };
    let (a1, a2) = stencil(1e-3);
    let (b1, b2) = stencil(5e-4);
    ((16.0 * b1 - a1) / 15.0, (16.0 * b2 - a2) / 15.0)
}

fn first_derivative_at(pert: &PerturbationModel, s: f64, opts: &MelnikovOptions) -> f64 {
    match &pert.family_derivatives {
        Some(d) => windowed(|t| d(t, s).0, window(pert, s, opts), opts.t_cut.is_some(), pert.decay_rate, opts).value,
        None => finite_difference_derivatives(pert, s, opts).0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MelnikovVerdict {
    /// Case A: the loop's own manifolds cross transversally.
    TransversalLoop,
    /// Case B: nondegenerate critical point of `L̃` at `s = 0`.
    PerturbedLoopTransversal,
    Degenerate,
    /// `s = 0` is not critical; see the candidate list.
    Inapplicable,
}

#[derive(Debug, Clone, Serialize)]
pub struct MelnikovResult {
    pub samples: Vec<(f64, f64)>,
    pub dl0: f64,
    pub ddl0: f64,
    pub verdict: MelnikovVerdict,
    /// Zeros of `L̃'` found on the grid, for the inapplicable case.
    pub critical_points: Vec<f64>,
    /// Every quadrature behind the samples met its tolerance.
    pub converged: bool,
    pub warnings: Vec<String>,
}

/// Case A: the loop's manifolds are transverse already.
pub fn special_loop_verdict(report: &TransversalityReport) -> Option<MelnikovVerdict> {
    (report.verdict == Verdict::Transversal).then_some(MelnikovVerdict::TransversalLoop)
}

/// Case B on the family through `κ(0)`.
pub fn perturbed_loop_verdict(pert: &PerturbationModel, s_grid: &[f64], opts: &MelnikovOptions) -> MelnikovResult {
    let values = reduced_melnikov(pert, s_grid, opts);
    let mut warnings: Vec<String> = values.iter().filter_map(|(s, v)| v.warning.as_ref().map(|w| format!("s = {s}: {w}"))).collect();
    let samples: Vec<(f64, f64)> = values.iter().map(|(s, v)| (*s, v.value)).collect();
    let converged = values.iter().all(|(_, v)| v.converged);
    let scale = samples.iter().map(|(_, v)| v.abs()).fold(1.0, f64::max);
    let (dl0, ddl0) = melnikov_derivatives(pert, opts);
    let verdict = if dl0.abs() <= opts.critical_tol * scale {
        if ddl0.abs() > opts.nondegenerate_tol * scale {
            MelnikovVerdict::PerturbedLoopTransversal
        } else {
            MelnikovVerdict::Degenerate
        }
    } else {
        MelnikovVerdict::Inapplicable
    };
    let mut critical_points = Vec::new();
    if verdict == MelnikovVerdict::Inapplicable {
        let d: Vec<f64> = s_grid.iter().map(|&s| first_derivative_at(pert, s, opts)).collect();
        for k in 1..s_grid.len() {
            if d[k - 1] == 0.0 {
                critical_points.push(s_grid[k - 1]);
            } else if d[k - 1].signum() != d[k].signum() {
                match bisect(|s| first_derivative_at(pert, s, opts), s_grid[k - 1], s_grid[k], 1e-10) {
                    Some(r) => critical_points.push(r),
                    None => warnings.push(format!("lost sign change of L' in [{}, {}]", s_grid[k - 1], s_grid[k])),
                }
            }
        }
    }
    MelnikovResult { samples, dl0, ddl0, verdict, critical_points, converged, warnings }
}

/// `Ξ_λ = max_{t>0} (4 arctan e^{λt} - 4 arctan e^t)`, the largest phase
/// lead of the fast pendulum on the coinciding family.
pub fn phase_lead(lambda: f64) -> f64 {
    if lambda <= 1.0 {
        return 0.0;
    }
    let g = |t: f64| (lambda * t).cosh() - lambda * t.cosh();
    let mut hi = 1.0;
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    let t = bisect(g, 0.0, hi, 1e-15).unwrap_or(0.0);
    4.0 * ((lambda * t).exp().atan() - t.exp().atan())
}

/// The `λ0 > 1` with `Ξ_λ0 = π/2`. Below it the integrand of `L̃''(0)` has
/// a fixed sign, so the family is nondegenerate for every `1 <= λ < λ0`.
pub fn lambda_zero() -> f64 {
    bisect(|l| phase_lead(l) - 0.5 * PI, 1.0 + 1e-9, 20.0, 1e-14).expect("Ξ is increasing and unbounded past π/2")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_lead_is_monotone() {
        assert_eq!(phase_lead(1.0), 0.0);
        let xs: Vec<f64> = [1.5, 2.0, 3.0, 5.0].iter().map(|&l| phase_lead(l)).collect();
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn constant_perturbation_has_zero_potential() {
        let p = PerturbationModel::new(|_| 3.0, |t, s| [t - s, 0.0, 0.0, 0.0], |s| [s, 0.0], 1.0);
        let v = reduced_value(&p, 0.3, &MelnikovOptions::default());
        assert_eq!(v.value, 0.0);
        assert_eq!(melnikov_derivatives(&p, &MelnikovOptions::default()), (0.0, 0.0));
    }
}
