//! Hamiltonians `H = ½⟨B(q)p, p⟩ + V(q)` described by their jets along the
//! line `q2 = 0`.
//!
//! Only nine scalar functions of `q1` are needed:
//!
//! ```text
//! V(q) = V0(q1) + V1(q1) q2 - ½ Y(q1) q2² + O(q2³)
//! B(q) = B0(q1) + ½ B2(q1) q2² + O(q2³)
//! ```
//!
//! with `B0 = [[b110, b120], [b120, b220]]` and `B2 = [[b112, b122], [b122, b222]]`.
//! The linear-in-`q2` part of `B` is assumed to vanish.

mod builtin;
mod perturbation;

pub use builtin::{
    builtin_model, builtin_model_unchecked, neumann, pendula_identical, pendula_weak, pendula_weak_special_loop,
    weak_coupling_h, weak_coupling_h_prime, Builtin, BuiltinKind, Params,
};
pub use perturbation::{Phase, PerturbationModel, Separatrix};

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::diff;

pub type Func = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A coefficient function with an optional analytic first derivative.
#[derive(Clone)]
pub struct ScalarFn {
    f: Func,
    df: Option<Func>,
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFn").field("analytic_derivative", &self.df.is_some()).finish()
    }
}

impl ScalarFn {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f), df: None }
    }

    pub fn with_derivative(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { f: Arc::new(f), df: Some(Arc::new(df)) }
    }

    pub fn constant(c: f64) -> Self {
        Self::with_derivative(move |_| c, |_| 0.0)
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn has_derivative(&self) -> bool {
        self.df.is_some()
    }

    #[inline]
    pub fn eval(&self, q: f64) -> f64 {
        (self.f)(q)
    }

    pub fn derivative(&self, q: f64) -> f64 {
        match &self.df {
            Some(df) => df(q),
            None => diff::derivative(&*self.f, q, diff::first_step(q)),
        }
    }

    pub fn second_derivative(&self, q: f64) -> f64 {
        match &self.df {
            Some(df) => diff::derivative(&**df, q, 1e-3 * q.abs().max(1.0)),
            None => diff::second_derivative(&*self.f, q),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Coefficients {
    pub v0: ScalarFn,
    pub v1: ScalarFn,
    pub y: ScalarFn,
    pub b110: ScalarFn,
    pub b120: ScalarFn,
    pub b220: ScalarFn,
    pub b112: ScalarFn,
    pub b122: ScalarFn,
    pub b222: ScalarFn,
}

impl Coefficients {
    pub fn names() -> [&'static str; 9] {
        ["V0", "V1", "Y", "b110", "b120", "b220", "b112", "b122", "b222"]
    }

    pub fn all(&self) -> [&ScalarFn; 9] {
        [&self.v0, &self.v1, &self.y, &self.b110, &self.b120, &self.b220, &self.b112, &self.b122, &self.b222]
    }
}

/// Values of the nine coefficient functions at one `q1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientValues {
    pub v0: f64,
    pub v1: f64,
    pub y: f64,
    pub b110: f64,
    pub b120: f64,
    pub b220: f64,
    pub b112: f64,
    pub b122: f64,
    pub b222: f64,
}

impl CoefficientValues {
    pub fn as_array(&self) -> [f64; 9] {
        [self.v0, self.v1, self.y, self.b110, self.b120, self.b220, self.b112, self.b122, self.b222]
    }
}

/// Analytic loop data supplied alongside a model. Used as a cross-check of
/// the closed-form profile and as the source of its derivatives.
#[derive(Debug, Clone)]
pub struct LoopHint {
    pub ds0: ScalarFn,
    pub s1: ScalarFn,
}

#[derive(Debug, Clone)]
pub struct HamiltonianModel {
    pub name: String,
    pub coeffs: Coefficients,
    pub domain: (f64, f64),
    pub periodic: bool,
    /// Diagonal reversor `(r1, r2)`, entries ±1.
    pub reversibility: Option<(f64, f64)>,
    pub loop_hint: Option<LoopHint>,
}

impl HamiltonianModel {
    pub fn new(name: impl Into<String>, coeffs: Coefficients, domain: (f64, f64), periodic: bool) -> Result<Self> {
        let (lo, hi) = domain;
        if !(lo <= 0.0 && hi > 0.0 && lo.is_finite() && hi.is_finite()) {
            return Err(Error::Construction(format!("domain [{lo}, {hi}] must be finite and contain 0")));
        }
        if periodic && hi < TAU {
            return Err(Error::Construction(format!("periodic domain [{lo}, {hi}] must contain 2π")));
        }
        Ok(Self { name: name.into(), coeffs, domain, periodic, reversibility: None, loop_hint: None })
    }

    pub fn with_reversibility(mut self, r1: f64, r2: f64) -> Result<Self> {
        if r1.abs() != 1.0 || r2.abs() != 1.0 {
            return Err(Error::Construction(format!("reversor entries must be ±1, got ({r1}, {r2})")));
        }
        self.reversibility = Some((r1, r2));
        Ok(self)
    }

    pub fn with_loop_hint(mut self, hint: LoopHint) -> Self {
        self.loop_hint = Some(hint);
        self
    }

    pub fn in_domain(&self, q: f64) -> bool {
        q >= self.domain.0 && q <= self.domain.1
    }

    pub fn check_domain(&self, q: f64) -> Result<()> {
        if self.in_domain(q) {
            Ok(())
        } else {
            Err(Error::Domain { q, lo: self.domain.0, hi: self.domain.1 })
        }
    }

    /// Right end of the loop's `q1` range: 2π on the torus, else the domain end.
    pub fn loop_end(&self) -> f64 {
        if self.periodic {
            TAU
        } else {
            self.domain.1
        }
    }

    pub fn eval_coefficients(&self, q: f64) -> Result<CoefficientValues> {
        self.check_domain(q)?;
        Ok(self.coefficients_at(q))
    }

    /// No domain check; integrators use this on points they already control.
    pub fn coefficients_at(&self, q: f64) -> CoefficientValues {
        let c = &self.coeffs;
        CoefficientValues {
            v0: c.v0.eval(q),
            v1: c.v1.eval(q),
            y: c.y.eval(q),
            b110: c.b110.eval(q),
            b120: c.b120.eval(q),
            b220: c.b220.eval(q),
            b112: c.b112.eval(q),
            b122: c.b122.eval(q),
            b222: c.b222.eval(q),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub worst: f64,
    pub at: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub model: String,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

/// Uniform grid with `n` points over `[a, b]`, both endpoints included.
pub fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect(),
    }
}

/// Sample every hypothesis the solvers rely on.
pub fn validate_hypotheses(model: &HamiltonianModel) -> ValidationReport {
    const N: usize = 256;
    let mut checks = Vec::new();
    let c = &model.coeffs;

    let origin = [c.v0.eval(0.0).abs(), c.v0.derivative(0.0).abs(), c.v1.eval(0.0).abs()];
    let worst = origin.iter().cloned().fold(0.0, f64::max);
    checks.push(Check {
        name: "H1-equilibrium".into(),
        passed: worst < 1e-10,
        worst,
        at: Some(0.0),
        detail: format!("|V0(0)| = {:e}, |V0'(0)| = {:e}, |V1(0)| = {:e}", origin[0], origin[1], origin[2]),
    });

    match crate::equilibrium::equilibrium_matrices(model) {
        Ok((a, b)) => {
            let pd = crate::numeric::linalg::is_positive_definite(&a);
            let det = crate::numeric::linalg::det(&a);
            checks.push(Check {
                name: "H1-hyperbolic".into(),
                passed: pd,
                worst: a[0][0].min(det),
                at: Some(0.0),
                detail: format!("A = {a:?}, det A = {det:e}"),
            });
            let bpd = crate::numeric::linalg::is_positive_definite(&b);
            checks.push(Check {
                name: "B0(0)-positive".into(),
                passed: bpd,
                worst: b[0][0].min(crate::numeric::linalg::det(&b)),
                at: Some(0.0),
                detail: format!("B0(0) = {b:?}"),
            });
        }
        Err(e) => checks.push(Check {
            name: "H1-hyperbolic".into(),
            passed: false,
            worst: f64::NAN,
            at: Some(0.0),
            detail: e.to_string(),
        }),
    }

    // kinetic matrix on the whole domain
    let (lo, hi) = model.domain;
    let mut worst_b = f64::INFINITY;
    let mut at_b = None;
    for q in grid(lo, hi, N) {
        let v = model.coefficients_at(q);
        let m = v.b110.min(v.b110 * v.b220 - v.b120 * v.b120);
        if m < worst_b || m.is_nan() {
            worst_b = m;
            at_b = Some(q);
        }
    }
    checks.push(Check {
        name: "B0-positive".into(),
        passed: worst_b > 0.0,
        worst: worst_b,
        at: at_b,
        detail: "min over grid of min(b110, det B0)".into(),
    });

    // V0 strictly negative between the equilibrium and the loop end
    let end = model.loop_end();
    let mut worst_v = f64::NEG_INFINITY;
    let mut at_v = None;
    for q in grid(0.0, end, N + 2).into_iter().skip(1).take(N) {
        let v = c.v0.eval(q);
        if v > worst_v || v.is_nan() {
            worst_v = v;
            at_v = Some(q);
        }
    }
    checks.push(Check {
        name: "H2-V0-negative".into(),
        passed: worst_v < 0.0,
        worst: worst_v,
        at: at_v,
        detail: format!("max V0 on (0, {end})"),
    });

    if model.periodic {
        let mut worst = 0.0f64;
        let mut at = None;
        for q in grid(lo.max(-TAU), (hi - TAU).min(TAU), 100) {
            for f in c.all() {
                let d = (f.eval(q + TAU) - f.eval(q)).abs();
                if d > worst || d.is_nan() {
                    worst = d;
                    at = Some(q);
                }
            }
        }
        checks.push(Check {
            name: "periodicity".into(),
            passed: worst < 1e-12,
            worst,
            at,
            detail: "max |f(q1 + 2π) - f(q1)| over the nine coefficients".into(),
        });
    }

    if let Some((r1, r2)) = model.reversibility {
        let mut worst = 0.0f64;
        let mut at = None;
        let sym = [1.0, r2, 1.0, 1.0, r1 * r2, 1.0, 1.0, r1 * r2, 1.0];
        let ext = hi.min(-lo);
        for q in grid(-ext, ext, N) {
            let a = model.coefficients_at(q).as_array();
            let b = model.coefficients_at(r1 * q).as_array();
            for k in 0..9 {
                let d = (b[k] * sym[k] - a[k]).abs();
                if d > worst || d.is_nan() {
                    worst = d;
                    at = Some(q);
                }
            }
        }
        checks.push(Check {
            name: "reversibility".into(),
            passed: worst < 1e-10,
            worst,
            at,
            detail: format!("coefficient symmetry under ({r1}, {r2})"),
        });
    }

    match crate::loop_profile::loop_profile(model) {
        Ok(p) => checks.push(Check {
            name: "H2-restriction".into(),
            passed: p.max_residual < 1e-6,
            worst: p.max_residual,
            at: Some(p.max_residual_at),
            detail: "max |S1' β S0' + V1| on the loop".into(),
        }),
        Err(e) => checks.push(Check {
            name: "H2-restriction".into(),
            passed: false,
            worst: f64::NAN,
            at: None,
            detail: e.to_string(),
        }),
    }

    checks.push(Check {
        name: "H3".into(),
        passed: true,
        worst: 0.0,
        at: None,
        detail: "kinetic matrix is even in q2 by construction".into(),
    });

    ValidationReport { model: model.name.clone(), checks }
}
