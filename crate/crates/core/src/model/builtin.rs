//! Three reference systems with closed-form loops.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use super::{Coefficients, HamiltonianModel, LoopHint, PerturbationModel, ScalarFn, Separatrix};
use crate::chart::ChartTransition;
use crate::error::{Error, Result};

pub type Params = BTreeMap<String, Vec<f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinKind {
    Neumann,
    PendulaIdentical,
    PendulaWeak,
}

impl BuiltinKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "neumann" => Ok(Self::Neumann),
            "pendula_identical" | "pendula" => Ok(Self::PendulaIdentical),
            "pendula_weak" => Ok(Self::PendulaWeak),
            other => Err(Error::Construction(format!(
                "unknown model '{other}' (expected neumann, pendula_identical or pendula_weak)"
            ))),
        }
    }
}

/// A reference model with the extra structure the pipelines need.
#[derive(Debug, Clone)]
pub struct Builtin {
    pub kind: BuiltinKind,
    pub model: HamiltonianModel,
    pub perturbation: Option<PerturbationModel>,
    pub transition: ChartTransition,
    /// Matching point used by the transversality check.
    pub q1_star: f64,
}

fn scalar(params: &Params, key: &str, default: Option<f64>) -> Result<f64> {
    match params.get(key) {
        Some(v) if v.len() == 1 => Ok(v[0]),
        Some(v) => Err(Error::Construction(format!("parameter {key} expects one value, got {}", v.len()))),
        None => default.ok_or_else(|| Error::Construction(format!("missing parameter {key}"))),
    }
}

fn reject_unknown(params: &Params, allowed: &[&str]) -> Result<()> {
    match params.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::Construction(format!("unknown parameter {k} (allowed: {})", allowed.join(", ")))),
        None => Ok(()),
    }
}

/// Build a reference model from a name and parameters, enforcing every
/// parameter constraint.
pub fn builtin_model(name: &str, params: &Params) -> Result<Builtin> {
    build(BuiltinKind::parse(name)?, params, true)
}

/// Like [`builtin_model`] but leaves the hyperbolicity-type constraints to
/// [`super::validate_hypotheses`], so that bad parameters can be reported
/// rather than refused.
pub fn builtin_model_unchecked(name: &str, params: &Params) -> Result<Builtin> {
    build(BuiltinKind::parse(name)?, params, false)
}

fn build(kind: BuiltinKind, params: &Params, strict: bool) -> Result<Builtin> {
    match kind {
        BuiltinKind::Neumann => {
            reject_unknown(params, &["l1", "l2"])?;
            let l1 = scalar(params, "l1", Some(1.0))?;
            let l2 = scalar(params, "l2", Some(2.0))?;
            if strict && !(0.0 < l1 && l1 < l2) {
                return Err(Error::Construction(format!("neumann needs 0 < l1 < l2, got ({l1}, {l2})")));
            }
            neumann_inner(l1, l2)
        }
        BuiltinKind::PendulaIdentical => {
            reject_unknown(params, &["f", "f0"])?;
            let f = match (params.get("f"), params.get("f0")) {
                (Some(_), Some(_)) => return Err(Error::Construction("give either f or f0, not both".into())),
                (Some(f), None) => f.clone(),
                (None, Some(_)) => vec![scalar(params, "f0", None)?],
                (None, None) => vec![0.0],
            };
            pendula_inner(&f, strict)
        }
        BuiltinKind::PendulaWeak => {
            reject_unknown(params, &["lambda"])?;
            pendula_weak(scalar(params, "lambda", Some(1.0))?)
        }
    }
}

/// The Neumann problem on the sphere, written in stereographic coordinates.
pub fn neumann(l1: f64, l2: f64) -> Result<Builtin> {
    if !(0.0 < l1 && l1 < l2) {
        return Err(Error::Construction(format!("neumann needs 0 < l1 < l2, got ({l1}, {l2})")));
    }
    neumann_inner(l1, l2)
}

fn neumann_inner(l1: f64, l2: f64) -> Result<Builtin> {
    if !(l1 > 0.0 && l2 > 0.0 && l1.is_finite() && l2.is_finite()) {
        return Err(Error::Construction(format!("neumann needs positive l1, l2, got ({l1}, {l2})")));
    }
    let (a, b) = (l1 * l1, l2 * l2);
    let w = |q: f64| 4.0 + q * q;
    let coeffs = Coefficients {
        v0: ScalarFn::with_derivative(
            move |q| -8.0 * a * q * q / w(q).powi(2),
            move |q| -16.0 * a * q * (4.0 - q * q) / w(q).powi(3),
        ),
        v1: ScalarFn::zero(),
        y: ScalarFn::with_derivative(
            move |q| 16.0 / w(q).powi(2) * (b - 2.0 * a * q * q / w(q)),
            move |q| -64.0 * b * q / w(q).powi(3) - 64.0 * a * q * (4.0 - 2.0 * q * q) / w(q).powi(4),
        ),
        b110: ScalarFn::with_derivative(move |q| w(q).powi(2) / 16.0, move |q| q * w(q) / 4.0),
        b120: ScalarFn::zero(),
        b220: ScalarFn::with_derivative(move |q| w(q).powi(2) / 16.0, move |q| q * w(q) / 4.0),
        b112: ScalarFn::with_derivative(move |q| w(q) / 4.0, |q| q / 2.0),
        b122: ScalarFn::zero(),
        b222: ScalarFn::with_derivative(move |q| w(q) / 4.0, |q| q / 2.0),
    };
    let hint = LoopHint {
        ds0: ScalarFn::with_derivative(
            move |q| 16.0 * l1 * q / w(q).powi(2),
            move |q| 16.0 * l1 * (4.0 - 3.0 * q * q) / w(q).powi(3),
        ),
        s1: ScalarFn::zero(),
    };
    let model = HamiltonianModel::new(format!("neumann(l1={l1}, l2={l2})"), coeffs, (-20.0, 20.0), false)?
        .with_reversibility(1.0, 1.0)?
        .with_loop_hint(hint);
    Ok(Builtin { kind: BuiltinKind::Neumann, model, perturbation: None, transition: ChartTransition::inversion(), q1_star: 2.0 })
}

fn cos_series(f: &[f64], q: f64) -> f64 {
    f.iter().enumerate().map(|(k, a)| a * (k as f64 * q).cos()).sum()
}

fn cos_series_prime(f: &[f64], q: f64) -> f64 {
    f.iter().enumerate().map(|(k, a)| -a * k as f64 * (k as f64 * q).sin()).sum()
}

/// Two identical pendula with coupling `f(q1) = Σ f[k] cos(k q1)`.
pub fn pendula_identical(f: &[f64]) -> Result<Builtin> {
    pendula_inner(f, true)
}

fn pendula_inner(f: &[f64], strict: bool) -> Result<Builtin> {
    if f.is_empty() || f.iter().any(|v| !v.is_finite()) {
        return Err(Error::Construction("coupling f needs at least one finite coefficient".into()));
    }
    let f0: f64 = f.iter().sum();
    if strict && !(0.0..0.5).contains(&f0) {
        return Err(Error::Construction(format!("pendula need 0 <= f(0) < 1/2, got f(0) = {f0}")));
    }
    let fy = f.to_vec();
    let fd = f.to_vec();
    let coeffs = Coefficients {
        v0: ScalarFn::with_derivative(|q| -4.0 * (0.5 * q).sin().powi(2), |q| -2.0 * q.sin()),
        v1: ScalarFn::with_derivative(|q| -q.sin(), |q| -q.cos()),
        y: ScalarFn::with_derivative(move |q| q.cos() - cos_series(&fy, q), move |q| -q.sin() - cos_series_prime(&fd, q)),
        b110: ScalarFn::constant(1.0),
        b120: ScalarFn::constant(-1.0),
        b220: ScalarFn::constant(2.0),
        b112: ScalarFn::zero(),
        b122: ScalarFn::zero(),
        b222: ScalarFn::zero(),
    };
    let hint = LoopHint {
        ds0: ScalarFn::with_derivative(|q| 4.0 * (0.5 * q).sin(), |q| 2.0 * (0.5 * q).cos()),
        s1: ScalarFn::with_derivative(|q| 2.0 * (0.5 * q).sin(), |q| (0.5 * q).cos()),
    };
    let label = f.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
    let model = HamiltonianModel::new(format!("pendula_identical(f=[{label}])"), coeffs, (-TAU, 2.0 * TAU), true)?
        .with_reversibility(-1.0, -1.0)?
        .with_loop_hint(hint);
    Ok(Builtin {
        kind: BuiltinKind::PendulaIdentical,
        model,
        perturbation: None,
        transition: ChartTransition::torus(),
        q1_star: PI,
    })
}

/// Coordinate change `h` taking one pendulum separatrix to the other:
/// `h(4 arctan e^t) = 4 arctan e^{λ t}`, odd and with `h(q + 2π) = h(q) + 2π`.
pub fn weak_coupling_h(lambda: f64, q: f64) -> f64 {
    let k = (q / TAU).round();
    let r = q - TAU * k;
    let u = (0.25 * r).tan();
    TAU * k + 4.0 * (u.signum() * u.abs().powf(lambda)).atan()
}

pub fn weak_coupling_h_prime(lambda: f64, q: f64) -> f64 {
    let k = (q / TAU).round();
    let u = (0.25 * (q - TAU * k)).tan();
    let a = u.abs();
    lambda * a.powf(lambda - 1.0) * (1.0 + u * u) / (1.0 + a.powf(2.0 * lambda))
}

/// Two pendula with frequencies 1 and λ, straightened so that the loop
/// where both pendula swing together lies on `q2 = 0`.
pub fn pendula_weak(lambda: f64) -> Result<Builtin> {
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(Error::Construction(format!("pendula_weak needs lambda >= 1, got {lambda}")));
    }
    let l = lambda;
    let l2 = l * l;
    let h = move |q: f64| weak_coupling_h(l, q);
    let hp = move |q: f64| weak_coupling_h_prime(l, q);
    let coeffs = Coefficients {
        v0: ScalarFn::with_derivative(
            move |q| -2.0 * (0.5 * q).sin().powi(2) - 2.0 * l2 * (0.5 * h(q)).sin().powi(2),
            move |q| -q.sin() - l2 * h(q).sin() * hp(q),
        ),
        v1: ScalarFn::with_derivative(move |q| -l2 * h(q).sin(), move |q| -l2 * h(q).cos() * hp(q)),
        y: ScalarFn::with_derivative(move |q| l2 * h(q).cos(), move |q| -l2 * h(q).sin() * hp(q)),
        b110: ScalarFn::constant(1.0),
        b120: ScalarFn::new(move |q| -hp(q)),
        b220: ScalarFn::new(move |q| 1.0 + hp(q).powi(2)),
        b112: ScalarFn::zero(),
        b122: ScalarFn::zero(),
        b222: ScalarFn::zero(),
    };
    let hint = LoopHint {
        ds0: ScalarFn::new(move |q| 2.0 * (0.5 * q).sin() * (1.0 + hp(q).powi(2))),
        s1: ScalarFn::with_derivative(move |q| 2.0 * l * (0.5 * h(q)).sin(), move |q| l * (0.5 * h(q)).cos() * hp(q)),
    };
    let model = HamiltonianModel::new(format!("pendula_weak(lambda={l})"), coeffs, (-TAU, 2.0 * TAU), true)?
        .with_reversibility(-1.0, -1.0)?
        .with_loop_hint(hint);

    let h_star = move |x: &[f64; 4]| 2.0 * (0.5 * (h(x[0]) - x[0] + x[1])).sin().powi(2);
    let family = move |t: f64, s: f64| -> [f64; 4] {
        let xi1 = 4.0 * (t - s).exp().atan();
        let xi2 = 4.0 * (l * t).exp().atan();
        let eta1 = 2.0 / (t - s).cosh();
        let eta2 = 2.0 * l / (l * t).cosh();
        [xi1, xi2 - 4.0 * (l * (t - s)).exp().atan(), eta1 + hp(xi1) * eta2, eta2]
    };
    let kappa = move |s: f64| [4.0 * (-s).exp().atan(), PI - 4.0 * (-l * s).exp().atan()];
    let derivs = move |t: f64, s: f64| -> (f64, f64) {
        let tau = t - s;
        let delta = 4.0 * ((l * t).exp().atan() - tau.exp().atan());
        let d1 = -2.0 / tau.cosh();
        let d2 = -2.0 * tau.tanh() / tau.cosh();
        (delta.sin() * d1, -(delta.cos() * d1 * d1 - delta.sin() * d2))
    };
    let separatrix = Separatrix {
        grad_s: Arc::new(move |q: [f64; 2]| {
            let w = 2.0 * l * (0.5 * (h(q[0]) + q[1])).sin();
            [2.0 * (0.5 * q[0]).sin() + w * hp(q[0]), w]
        }),
        kinetic: Arc::new(move |q: [f64; 2]| {
            let d = hp(q[0]);
            [[1.0, -d], [-d, 1.0 + d * d]]
        }),
    };
    let perturbation = PerturbationModel::new(h_star, family, kappa, 1.0)
        .with_time_scale(l.max(1.0))
        .with_family_derivatives(derivs)
        .with_separatrix(separatrix);

    Ok(Builtin {
        kind: BuiltinKind::PendulaWeak,
        model,
        perturbation: Some(perturbation),
        transition: ChartTransition::torus(),
        q1_star: PI,
    })
}

/// The loop where only the slow pendulum swings; its manifolds are the
/// product graphs `η2 = ±2λ sin(ξ2/2)`.
pub fn pendula_weak_special_loop(lambda: f64) -> Result<HamiltonianModel> {
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(Error::Construction(format!("pendula_weak needs lambda >= 1, got {lambda}")));
    }
    let l2 = lambda * lambda;
    let coeffs = Coefficients {
        v0: ScalarFn::with_derivative(|q| -2.0 * (0.5 * q).sin().powi(2), |q| -q.sin()),
        v1: ScalarFn::zero(),
        y: ScalarFn::constant(l2),
        b110: ScalarFn::constant(1.0),
        b120: ScalarFn::zero(),
        b220: ScalarFn::constant(1.0),
        b112: ScalarFn::zero(),
        b122: ScalarFn::zero(),
        b222: ScalarFn::zero(),
    };
    let hint = LoopHint {
        ds0: ScalarFn::with_derivative(|q| 2.0 * (0.5 * q).sin(), |q| (0.5 * q).cos()),
        s1: ScalarFn::zero(),
    };
    Ok(HamiltonianModel::new(format!("pendula_weak_special(lambda={lambda})"), coeffs, (-TAU, 2.0 * TAU), true)?
        .with_reversibility(-1.0, -1.0)?
        .with_loop_hint(hint))
}
