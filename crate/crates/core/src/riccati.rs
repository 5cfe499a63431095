//! The curvature `T = ∂²S/∂q2²` of an invariant manifold along the loop.
//!
//! It satisfies the scalar Riccati equation
//!
//! ```text
//! β S0' T' + 2 δ T + b220 T² = α
//! δ = b120 S1'
//! α = Y - b110 S1'² - ½ (b112 S0'² + 2 b122 S0' S1 + b222 S1²)
//! ```
//!
//! which is singular at `q1 = 0`, where `S0'` vanishes. The manifold picks
//! the root `T0 = (-δ(0) + √Δ) / b220(0)`, `Δ = δ(0)² + b220(0) α(0)`, and
//! that solution attracts its neighbours in the integration direction, so
//! a start slightly off the singular point is harmless.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::loop_profile::LoopProfile;
use crate::numeric::ode::{self, Control, DenseOutput, OdeOptions};
use crate::numeric::roots::bisect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Unstable,
    Stable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiccatiTerms {
    /// Coefficient of `T'`.
    pub lead: f64,
    pub delta: f64,
    pub alpha: f64,
    pub b220: f64,
}

impl RiccatiTerms {
    /// Right-hand side numerator, `α - 2δT - b220 T²`.
    pub fn numerator(&self, t: f64) -> f64 {
        self.alpha - 2.0 * self.delta * t - self.b220 * t * t
    }
}

/// Coefficients of the equation for either manifold. On the stable side
/// the loop runs the other way, which flips the sign of `S0'`, `S1` and
/// with them of `lead` and `δ`.
pub fn riccati_terms(profile: &LoopProfile, branch: Branch, q: f64) -> RiccatiTerms {
    let c = &profile.model.coeffs;
    let ds0 = profile.ds0(q);
    let s1 = profile.s1(q);
    let ds1 = profile.ds1(q);
    let delta = c.b120.eval(q) * ds1;
    let alpha = c.y.eval(q)
        - c.b110.eval(q) * ds1 * ds1
        - 0.5 * (c.b112.eval(q) * ds0 * ds0 + 2.0 * c.b122.eval(q) * ds0 * s1 + c.b222.eval(q) * s1 * s1);
    let lead = profile.beta(q) * ds0;
    let b220 = c.b220.eval(q);
    match branch {
        Branch::Unstable => RiccatiTerms { lead, delta, alpha, b220 },
        Branch::Stable => RiccatiTerms { lead: -lead, delta: -delta, alpha, b220 },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiccatiInitial {
    /// Unstable initial value; the stable one is `-t0`.
    pub t0: f64,
    pub delta0: f64,
    pub alpha0: f64,
    pub b220_0: f64,
    pub discriminant: f64,
    /// Contraction rate of neighbouring solutions, `2√Δ`.
    pub psi0: f64,
}

impl RiccatiInitial {
    pub fn value(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Unstable => self.t0,
            Branch::Stable => (self.delta0 - self.discriminant.sqrt()) / self.b220_0,
        }
    }
}

pub fn riccati_initial(profile: &LoopProfile) -> Result<RiccatiInitial> {
    let t = riccati_terms(profile, Branch::Unstable, 0.0);
    let disc = t.delta * t.delta + t.b220 * t.alpha;
    if !(disc > 0.0) {
        return Err(Error::NoRealSlope { discriminant: disc });
    }
    let r = disc.sqrt();
    Ok(RiccatiInitial {
        t0: (-t.delta + r) / t.b220,
        delta0: t.delta,
        alpha0: t.alpha,
        b220_0: t.b220,
        discriminant: disc,
        psi0: 2.0 * r,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiccatiOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Distance of the start from the singular point; `None` means
    /// `1e-4 · |target|`.
    pub epsilon: Option<f64>,
    /// `|T|` above this means the manifold stopped being a graph.
    pub cap: f64,
    /// Added to the start value, for sensitivity studies.
    pub initial_offset: f64,
    pub startup_check: bool,
    pub max_steps: usize,
}

impl Default for RiccatiOptions {
    fn default() -> Self {
        Self { rtol: 1e-9, atol: 1e-12, epsilon: None, cap: 1e8, initial_offset: 0.0, startup_check: true, max_steps: 200_000 }
    }
}

impl RiccatiOptions {
    fn ode(&self) -> OdeOptions {
        OdeOptions { rtol: self.rtol, atol: self.atol, max_steps: self.max_steps, ..Default::default() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RiccatiDiagnostics {
    pub epsilon: f64,
    pub steps: usize,
    pub rejected: usize,
    pub evaluations: usize,
    /// First-order correction applied to the start value.
    pub start_correction: f64,
    /// `|T+ - T-|` at the target for starts offset by `±10ε`.
    pub startup_spread: Option<f64>,
    pub startup_ok: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct RiccatiSolution {
    pub branch: Branch,
    pub initial: RiccatiInitial,
    pub q_start: f64,
    pub t_start: f64,
    pub target: f64,
    pub dense: DenseOutput<1>,
    pub diagnostics: RiccatiDiagnostics,
}

impl RiccatiSolution {
    fn covers(&self, q: f64) -> bool {
        let (a, b) = if self.target >= 0.0 { (0.0, self.target) } else { (self.target, 0.0) };
        q >= a && q <= b
    }

    /// `T(q)` for `q` between 0 and the target. Between the singular point
    /// and the start the value is interpolated linearly.
    pub fn eval(&self, q: f64) -> Result<f64> {
        if !self.covers(q) {
            let (lo, hi) = if self.target >= 0.0 { (0.0, self.target) } else { (self.target, 0.0) };
            return Err(Error::Domain { q, lo, hi });
        }
        if q.abs() <= self.q_start.abs() {
            let t0 = self.initial.value(self.branch);
            return Ok(t0 + (self.t_start - t0) * q / self.q_start);
        }
        self.dense.eval(q).map(|v| v[0]).ok_or(Error::Domain { q, lo: self.q_start, hi: self.target })
    }

    pub fn derivative(&self, q: f64) -> Result<f64> {
        if q.abs() <= self.q_start.abs() && self.covers(q) {
            return Ok((self.t_start - self.initial.value(self.branch)) / self.q_start);
        }
        self.dense.eval_derivative(q).map(|v| v[0]).ok_or(Error::Domain { q, lo: self.q_start, hi: self.target })
    }

    pub fn value_at_target(&self) -> f64 {
        self.dense.segments.last().map(|s| s.eval(s.t1())[0]).unwrap_or(self.t_start)
    }

    /// `n` samples from the start to the target.
    pub fn samples(&self, n: usize) -> Vec<(f64, f64)> {
        crate::model::grid(self.q_start, self.target, n)
            .into_iter()
            .map(|q| (q, self.eval(q).unwrap_or(f64::NAN)))
            .collect()
    }
}

/// Unstable manifold, integrated from `ε` towards `target`.
pub fn solve_riccati(profile: &LoopProfile, target: f64, opts: &RiccatiOptions) -> Result<RiccatiSolution> {
    solve_branch(profile, Branch::Unstable, target, opts)
}

/// Stable manifold of the same equilibrium, integrated directly.
pub fn solve_riccati_stable(profile: &LoopProfile, target: f64, opts: &RiccatiOptions) -> Result<RiccatiSolution> {
    solve_branch(profile, Branch::Stable, target, opts)
}

pub fn solve_branch(profile: &LoopProfile, branch: Branch, target: f64, opts: &RiccatiOptions) -> Result<RiccatiSolution> {
    profile.model.check_domain(target)?;
    if target == 0.0 || !target.is_finite() {
        return Err(Error::Unsupported(format!("target must be a nonzero point of the loop, got {target}")));
    }
    let initial = riccati_initial(profile)?;
    let mut sol = run(profile, branch, &initial, target, opts, opts.initial_offset)?;
    if opts.startup_check {
        let eps = sol.diagnostics.epsilon;
        let hi = run(profile, branch, &initial, target, opts, opts.initial_offset + 10.0 * eps);
        let lo = run(profile, branch, &initial, target, opts, opts.initial_offset - 10.0 * eps);
        if let (Ok(hi), Ok(lo)) = (hi, lo) {
            let spread = (hi.value_at_target() - lo.value_at_target()).abs();
            sol.diagnostics.startup_spread = Some(spread);
            sol.diagnostics.startup_ok = Some(spread <= opts.rtol * (1.0 + sol.value_at_target().abs()));
        } else {
            sol.diagnostics.startup_ok = Some(false);
        }
    }
    Ok(sol)
}

fn run(
    profile: &LoopProfile,
    branch: Branch,
    initial: &RiccatiInitial,
    target: f64,
    opts: &RiccatiOptions,
    offset: f64,
) -> Result<RiccatiSolution> {
    let dir = target.signum();
    let eps = opts.epsilon.unwrap_or(1e-4 * target.abs());
    if !(eps > 0.0 && eps < target.abs()) {
        return Err(Error::Unsupported(format!("epsilon {eps} must lie in (0, |target|)")));
    }
    let q_start = dir * eps;
    let t0 = initial.value(branch);
    // one Taylor step off the singular point: lead ≈ c q, so T ≈ T0 + q N_q / (c - N_T)
    let terms = riccati_terms(profile, branch, q_start);
    let n_t = -2.0 * terms.delta - 2.0 * terms.b220 * t0;
    let correction = q_start * terms.numerator(t0) / (terms.lead - n_t * q_start);
    let t_start = t0 + correction + offset;

    let rhs = |q: f64, y: &[f64; 1]| {
        let tm = riccati_terms(profile, branch, q);
        [tm.numerator(y[0]) / tm.lead]
    };
    let cap = opts.cap;
    let mut last = (q_start, t_start);
    let result = ode::integrate(rhs, q_start, [t_start], target, &opts.ode(), |seg, y| {
        last = (seg.t1(), y[0]);
        if y[0].abs() > cap || !y[0].is_finite() {
            Control::Stop
        } else {
            Control::Continue
        }
    });
    let tr = match result {
        Ok(tr) => tr,
        Err(Error::Integration { at, .. }) if last.1.abs() > 1e3 => {
            return Err(Error::BlowUp { q: at, value: last.1.abs() })
        }
        Err(e) => return Err(e),
    };
    if tr.stopped {
        return Err(Error::BlowUp { q: tr.t, value: tr.y[0].abs() });
    }
    Ok(RiccatiSolution {
        branch,
        initial: *initial,
        q_start,
        t_start,
        target,
        diagnostics: RiccatiDiagnostics {
            epsilon: eps,
            steps: tr.dense.steps(),
            rejected: tr.rejected,
            evaluations: tr.evaluations,
            start_correction: correction,
            startup_spread: None,
            startup_ok: None,
        },
        dense: tr.dense,
    })
}

/// `lead T' + 2δT + b220 T² - α` at `q`, with `T'` from the dense output.
pub fn riccati_residual(profile: &LoopProfile, sol: &RiccatiSolution, q: f64) -> Result<f64> {
    let tm = riccati_terms(profile, sol.branch, q);
    let t = sol.eval(q)?;
    Ok(tm.lead * sol.derivative(q)? + 2.0 * tm.delta * t + tm.b220 * t * t - tm.alpha)
}

/// Independent route to `T^u(target)`.
///
/// Along the loop, in the time variable where the equation is regular,
/// `T = v / y` for the linear system
///
/// ```text
/// q1' = β S0',   y' = b220 v,   v' = α y - 2 δ v
/// ```
///
/// i.e. `y'' + (2δ - b220'/b220) y' - b220 α y = 0`. The start sits very
/// close to the equilibrium on the ray `v = T0 y`; the growing solution
/// takes over from there.
pub fn riccati_to_linear_oracle(profile: &LoopProfile, target: f64, opts: &RiccatiOptions) -> Result<f64> {
    profile.model.check_domain(target)?;
    let dir = target.signum();
    let initial = riccati_initial(profile)?;
    let q_init = dir * 1e-6 * target.abs();
    let rhs = |_t: f64, s: &[f64; 3]| {
        let tm = riccati_terms(profile, Branch::Unstable, s[0]);
        [tm.lead, tm.b220 * s[2], tm.alpha * s[1] - 2.0 * tm.delta * s[2]]
    };
    let o = OdeOptions { rtol: opts.rtol.min(1e-11), atol: 1e-15, max_steps: opts.max_steps, ..Default::default() };
    let mut pole = None;
    let tr = ode::integrate(rhs, 0.0, [q_init, 1.0, initial.t0], 1e4, &o, |_, s| {
        if s[1] <= 0.0 {
            pole = Some(s[0]);
            return Control::Stop;
        }
        if (s[0] - target) * dir >= 0.0 {
            Control::Stop
        } else {
            Control::Continue
        }
    })?;
    if let Some(q) = pole {
        return Err(Error::BlowUp { q, value: f64::INFINITY });
    }
    if !tr.stopped {
        return Err(Error::Integration { at: tr.t, reason: "loop did not reach the target".into() });
    }
    let seg = tr.dense.segments.last().expect("at least one step");
    let tc = bisect(|t| seg.eval(t)[0] - target, seg.t0, seg.t1(), 1e-15 * seg.t1().abs().max(1.0))
        .ok_or_else(|| Error::Integration { at: tr.t, reason: "could not bracket the target".into() })?;
    let s = seg.eval(tc);
    Ok(s[2] / s[1])
}
