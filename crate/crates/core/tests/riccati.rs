mod common;

use std::f64::consts::PI;

use common::*;
use homoclinic::loop_profile::loop_profile;
use homoclinic::model::{neumann, pendula_identical, pendula_weak, weak_coupling_h, Coefficients, HamiltonianModel, ScalarFn};
use homoclinic::riccati::{
    riccati_initial, riccati_residual, riccati_terms, solve_riccati, solve_riccati_stable, Branch, RiccatiOptions,
};
use homoclinic::Error;

fn opts() -> RiccatiOptions {
    RiccatiOptions::default()
}

#[test]
fn neumann_curve_follows_closed_form() {
    for (l1, l2) in [(1.0, 2.0), (0.4, 3.0), (1.9, 2.0)] {
        let p = loop_profile(&neumann(l1, l2).unwrap().model).unwrap();
        let sol = solve_riccati(&p, 8.0, &opts()).unwrap();
        for q in linspace(1e-3, 8.0, 60) {
            let want = neumann_tu(l1, l2, q);
            let got = sol.eval(q).unwrap();
            // second-order start error dominates next to ε
            let tol = if q < 0.05 { 1e-6 } else { 1e-7 };
            assert!((got - want).abs() < tol, "({l1}, {l2}) at {q}: {got} vs {want}");
        }
        let neg = solve_riccati(&p, -3.0, &opts()).unwrap();
        assert!((neg.eval(-3.0).unwrap() - neumann_tu(l1, l2, -3.0)).abs() < 1e-7);
    }
}

#[test]
fn initial_slope_is_positive_root() {
    let p = loop_profile(&neumann(1.0, 2.0).unwrap().model).unwrap();
    let ini = riccati_initial(&p).unwrap();
    assert!((ini.t0 - 2.0).abs() < 1e-10);
    assert!((ini.psi0 - 2.0 * ini.discriminant.sqrt()).abs() < 1e-14);
    assert_eq!(ini.value(Branch::Stable), -ini.t0);
    // T0 solves b220 T² + 2δ T - α = 0
    let r = ini.b220_0 * ini.t0 * ini.t0 + 2.0 * ini.delta0 * ini.t0 - ini.alpha0;
    assert!(r.abs() < 1e-10);
}

#[test]
fn general_coupling_matches_independent_integrator() {
    for f in [vec![0.25, -0.125], vec![0.1, 0.05, 0.02], vec![0.0, 0.1]] {
        let p = loop_profile(&pendula_identical(&f).unwrap().model).unwrap();
        let t = solve_riccati(&p, PI, &opts()).unwrap().eval(PI).unwrap();
        let want = pendula_tu_pi(&f);
        assert!((t - want).abs() < 1e-6, "f = {f:?}: {t} vs {want}");
    }
}

#[test]
fn residual_is_small_along_the_curve() {
    for b in [neumann(1.0, 2.0).unwrap(), pendula_identical(&[0.2, 0.03]).unwrap(), pendula_weak(2.0).unwrap()] {
        let p = loop_profile(&b.model).unwrap();
        let target = if b.model.periodic { PI } else { 6.0 };
        let sol = solve_riccati(&p, target, &opts()).unwrap();
        for q in linspace(sol.q_start * 2.0, target, 200) {
            let alpha = riccati_terms(&p, Branch::Unstable, q).alpha;
            let r = riccati_residual(&p, &sol, q).unwrap();
            assert!(r.abs() < 1e-7 * (1.0 + alpha.abs()), "{} at {q}: {r:e}", b.model.name);
        }
    }
}

#[test]
fn pole_is_reported() {
    let b = (0.8f64).sqrt();
    let p = loop_profile(&pendula_identical(&[0.1]).unwrap().model).unwrap();
    let pole = pendula_q(b);
    match solve_riccati(&p, 1.95 * PI, &opts()) {
        Err(Error::BlowUp { q, .. }) => assert!((q - pole).abs() < 1e-3, "blow-up at {q}, pole at {pole}"),
        other => panic!("expected blow-up, got {other:?}"),
    }
    assert!(solve_riccati(&p, pole - 0.05, &opts()).is_ok());
}

#[test]
fn complex_slope_is_rejected() {
    let coeffs = Coefficients {
        v0: ScalarFn::with_derivative(|q| -q * q, |q| -2.0 * q),
        v1: ScalarFn::zero(),
        y: ScalarFn::constant(-10.0),
        b110: ScalarFn::constant(1.0),
        b120: ScalarFn::zero(),
        b220: ScalarFn::constant(1.0),
        b112: ScalarFn::zero(),
        b122: ScalarFn::zero(),
        b222: ScalarFn::zero(),
    };
    let m = HamiltonianModel::new("saddle-center", coeffs, (-2.0, 2.0), false).unwrap();
    let p = loop_profile(&m).unwrap();
    assert!(matches!(riccati_initial(&p), Err(Error::NoRealSlope { .. })));
}

#[test]
fn weak_coupling_curvature_in_closed_form() {
    // the fast pendulum sits on its own separatrix, S1 = 2λ sin(h/2)
    for l in [1.0, 2.0, 3.0] {
        let p = loop_profile(&pendula_weak(l).unwrap().model).unwrap();
        let sol = solve_riccati(&p, PI, &opts()).unwrap();
        for q in linspace(0.05, PI, 25) {
            let q = q.min(PI);
            let want = l * (0.5 * weak_coupling_h(l, q)).cos();
            assert!((sol.eval(q).unwrap() - want).abs() < 1e-6, "λ={l} q={q}: {} vs {want}", sol.eval(q).unwrap());
        }
    }
}

#[test]
fn stable_branch_mirrors_unstable() {
    let p = loop_profile(&neumann(1.0, 2.5).unwrap().model).unwrap();
    let tu = solve_riccati(&p, 3.0, &opts()).unwrap();
    let ts = solve_riccati_stable(&p, 3.0, &opts()).unwrap();
    for q in linspace(0.1, 3.0, 15) {
        assert!((ts.eval(q).unwrap() + tu.eval(q).unwrap()).abs() < 1e-8);
    }
}

#[test]
fn diagnostics_are_filled() {
    let p = loop_profile(&neumann(1.0, 2.0).unwrap().model).unwrap();
    let sol = solve_riccati(&p, 2.0, &opts()).unwrap();
    let d = &sol.diagnostics;
    assert!((d.epsilon - 2e-4).abs() < 1e-18);
    assert!(d.steps > 0 && d.evaluations >= 6 * d.steps);
    assert_eq!(d.startup_ok, Some(true));
    assert!(d.startup_spread.unwrap() < 1e-6);
    let samples = sol.samples(11);
    assert_eq!(samples.len(), 11);
    assert!(samples.iter().all(|(_, t)| t.is_finite()));
    assert!(sol.eval(2.5).is_err());
}
