mod common;

use std::f64::consts::TAU;

use common::linspace;
use homoclinic::loop_profile::{inner_time_param, loop_profile};
use homoclinic::model::{neumann, pendula_identical, pendula_weak, Coefficients, HamiltonianModel, LoopHint, ScalarFn};
use homoclinic::Error;

#[test]
fn neumann_profile() {
    let l1 = 1.3;
    let p = loop_profile(&neumann(l1, 2.0).unwrap().model).unwrap();
    for q in linspace(0.0, 10.0, 51) {
        let w = 4.0 + q * q;
        assert!((p.ds0(q) - 16.0 * l1 * q / (w * w)).abs() < 1e-13);
        assert!((p.beta(q) - w * w / 16.0).abs() < 1e-12 * w * w);
        assert_eq!(p.s1(q), 0.0);
        // q1(t) = 2 e^{λ1 t}, so q1' = λ1 q1
        assert!((p.velocity(q) - l1 * q).abs() < 1e-12 * (1.0 + q));
    }
    assert!(p.sigma.is_none());
}

#[test]
fn pendula_profile_and_time() {
    let p = loop_profile(&pendula_identical(&[0.1]).unwrap().model).unwrap();
    for q in linspace(-TAU, 2.0 * TAU, 61) {
        assert!((p.ds0(q) - 4.0 * (0.5 * q).sin()).abs() < 1e-12, "q = {q}");
        assert!((p.ds0(q + TAU) + p.ds0(q)).abs() < 1e-12);
        assert!((p.s1(q + TAU) + p.s1(q)).abs() < 1e-12);
    }
    assert!((p.sigma.unwrap() - 16.0).abs() < 1e-10);
    for t in [-3.0, -1.0, 0.5, 2.0] {
        let r = inner_time_param(&p, std::f64::consts::PI, t).unwrap();
        assert!((r.q1 - 4.0 * t.exp().atan()).abs() < 1e-9, "t = {t}");
    }
}

#[test]
fn weak_profile_matches_generating_function() {
    let l = 2.0;
    let p = loop_profile(&pendula_weak(l).unwrap().model).unwrap();
    for q in linspace(0.1, TAU - 0.1, 40) {
        let h = homoclinic::model::weak_coupling_h(l, q);
        assert!((p.s1(q) - 2.0 * l * (0.5 * h).sin()).abs() < 1e-10);
    }
}

fn pendula_coeffs() -> Coefficients {
    pendula_identical(&[0.0]).unwrap().model.coeffs
}

#[test]
fn radicand_sign_change_is_no_loop() {
    let mut c = pendula_coeffs();
    c.v0 = ScalarFn::new(|q: f64| -4.0 * (0.5 * q).sin().powi(2) + 0.5 * (q / 3.0).sin().powi(8));
    let m = HamiltonianModel::new("bumpy", c, (-TAU, 2.0 * TAU), true).unwrap();
    assert!(matches!(loop_profile(&m), Err(Error::NoLoop { .. })));
}

#[test]
fn wrong_v1_is_inconsistent() {
    let mut c = pendula_coeffs();
    c.v1 = ScalarFn::new(|q: f64| -2.0 * q.sin());
    let m = HamiltonianModel::new("twisted", c, (-TAU, 2.0 * TAU), true).unwrap();
    assert!(matches!(loop_profile(&m), Err(Error::InconsistentV1 { .. })));
}

#[test]
fn wrong_hint_is_rejected() {
    let m = pendula_identical(&[0.0]).unwrap().model.with_loop_hint(LoopHint {
        ds0: ScalarFn::new(|q: f64| 3.0 * (0.5 * q).sin()),
        s1: ScalarFn::new(|q: f64| 2.0 * (0.5 * q).sin()),
    });
    assert!(matches!(loop_profile(&m), Err(Error::Construction(_))));
}

#[test]
fn differences_stand_in_for_missing_derivatives() {
    // same model without the analytic loop
    let mut m = pendula_identical(&[0.2]).unwrap().model;
    m.loop_hint = None;
    let p = loop_profile(&m).unwrap();
    for q in linspace(0.2, 6.0, 30) {
        assert!((p.ds1(q) - (0.5 * q).cos()).abs() < 1e-8);
        assert!((p.d2s0(q) - 2.0 * (0.5 * q).cos()).abs() < 1e-8);
        assert!(p.restriction_residual(q).abs() < 1e-8);
    }
}
