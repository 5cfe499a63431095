//! Acceptance run: one line per criterion, non-zero exit if any fails.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use common::*;
use homoclinic::chart::{
    chart_transversality, stable_from_reversibility, torus_transversality, Verdict, VerdictTolerances,
};
use homoclinic::equilibrium::{check_positive_definite, linearize};
use homoclinic::loop_profile::loop_profile;
use homoclinic::melnikov::{
    lambda_zero, melnikov_derivatives, melnikov_potential, perturbed_loop_verdict, reduced_value, MelnikovOptions,
    MelnikovVerdict,
};
use homoclinic::model::{neumann, pendula_identical, pendula_weak, Builtin, HamiltonianModel};
use homoclinic::riccati::{
    riccati_initial, riccati_to_linear_oracle, solve_riccati, solve_riccati_stable, RiccatiOptions,
};
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn ok(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn builtins() -> Vec<Builtin> {
    vec![
        neumann(1.0, 2.0).unwrap(),
        neumann(0.5, 1.5).unwrap(),
        pendula_identical(&[0.0]).unwrap(),
        pendula_identical(&[0.1]).unwrap(),
        pendula_identical(&[0.25, -0.125]).unwrap(),
        pendula_weak(1.0).unwrap(),
        pendula_weak(2.0).unwrap(),
        pendula_weak(3.0).unwrap(),
    ]
}

fn opts() -> RiccatiOptions {
    RiccatiOptions::default()
}

fn c01() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    for (l1, l2) in [(1.0, 2.0), (1.0, 3.0), (1.75, 2.0), (0.5, 1.5)] {
        let clock = Instant::now();
        let p = loop_profile(&neumann(l1, l2).unwrap().model).unwrap();
        let t = solve_riccati(&p, 2.0, &opts()).unwrap().eval(2.0).unwrap();
        slowest = slowest.max(clock.elapsed().as_secs_f64());
        worst = worst.max((t - neumann_tu_at_2(l1, l2)).abs());
    }
    ok(worst < 1e-6 && slowest < 1.0, format!("max |T(2) - closed form| = {worst:.2e}, slowest solve {slowest:.3}s"))
}

fn c02() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut all_transversal = true;
    for (l1, l2) in [(1.0, 2.0), (1.0, 3.0), (1.75, 2.0), (0.5, 1.5)] {
        let b = neumann(l1, l2).unwrap();
        let p = loop_profile(&b.model).unwrap();
        let r = chart_transversality(&p, &b.transition, 2.0, &opts(), &VerdictTolerances::default()).unwrap();
        worst = worst.max((r.gap - neumann_gap(l1, l2)).abs());
        all_transversal &= r.verdict == Verdict::Transversal;
    }
    ok(worst < 1e-6 && all_transversal, format!("max gap error {worst:.2e}, all transversal: {all_transversal}"))
}

fn c03() -> Outcome {
    let mut worst: f64 = 0.0;
    for (l1, l2) in [(1.0, 2.0), (1.0, 3.0), (1.75, 2.0), (0.5, 1.5), (0.3, 7.25)] {
        let p = loop_profile(&neumann(l1, l2).unwrap().model).unwrap();
        worst = worst.max((riccati_initial(&p).unwrap().t0 - l2).abs());
    }
    for f0 in [0.0, 0.1, 0.2, 0.3, 0.455] {
        let p = loop_profile(&pendula_identical(&[f0]).unwrap().model).unwrap();
        let b = (1.0 - 2.0 * f0).sqrt();
        worst = worst.max((riccati_initial(&p).unwrap().t0 - 0.5 * (1.0 + b)).abs());
    }
    ok(worst <= 1e-15, format!("max |T0 - expected| = {worst:.2e} over 10 parameter values"))
}

fn c04() -> Outcome {
    let mut worst: f64 = 0.0;
    for b in [0.3, 0.6, 0.9] {
        let f0 = 0.5 * (1.0 - b * b);
        let x_max = (b - 0.1f64).min(0.0);
        let p = loop_profile(&pendula_identical(&[f0]).unwrap().model).unwrap();
        let sol = solve_riccati(&p, pendula_q(x_max), &opts()).unwrap();
        for x in linspace(-1.0 + 1e-3, x_max, 200) {
            let q = pendula_q(x).min(sol.target);
            let tbar = 2.0 * sol.eval(q).unwrap() + x;
            worst = worst.max((tbar - pendula_tbar(b, x)).abs());
        }
    }
    ok(worst < 1e-6, format!("max |T̄ - closed form| = {worst:.2e} for b in {{0.3, 0.6, 0.9}}"))
}

fn c05() -> Outcome {
    let p = loop_profile(&pendula_identical(&[0.0]).unwrap().model).unwrap();
    let r = torus_transversality(&p, &opts(), &VerdictTolerances::default()).unwrap();
    ok(r.tu.abs() < 1e-8 && r.verdict == Verdict::Tangent, format!("|T(π)| = {:.2e}, verdict {:?}", r.tu.abs(), r.verdict))
}

fn c06() -> Outcome {
    let p = loop_profile(&pendula_identical(&[0.25, -0.125]).unwrap().model).unwrap();
    let sol = solve_riccati(&p, PI, &opts()).unwrap();
    let (c, d) = (0.5, 0.75f64.sqrt());
    let mut worst: f64 = f64::NEG_INFINITY;
    for x in linspace(-1.0 + 1e-3, 0.0, 300) {
        let tbar = 2.0 * sol.eval(pendula_q(x).min(PI)).unwrap() + x;
        worst = worst.max(pendula_tbar(c, x) - tbar).max(tbar - pendula_tbar(d, x));
    }
    let r = torus_transversality(&p, &opts(), &VerdictTolerances::default()).unwrap();
    ok(
        worst <= 1e-9 && r.tu < 0.0 && r.verdict == Verdict::Transversal,
        format!("worst bracket violation {worst:.2e}, T(π) = {:.6}, verdict {:?}", r.tu, r.verdict),
    )
}

fn c07() -> Outcome {
    let mut models: Vec<(HamiltonianModel, f64)> = builtins().into_iter().map(|b| (b.model, b.q1_star)).collect();
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for k in 0..20 {
        if k % 2 == 0 {
            let l1 = rng.gen_range(0.5..2.0);
            let l2 = l1 + rng.gen_range(0.2..2.0);
            models.push((neumann(l1, l2).unwrap().model, rng.gen_range(0.5..4.0)));
        } else {
            let a1: f64 = rng.gen_range(-0.1..0.1);
            let a0 = rng.gen_range(0.0..0.45) - a1;
            models.push((pendula_identical(&[a0, a1]).unwrap().model, rng.gen_range(0.5..PI)));
        }
    }
    let mut worst: f64 = 0.0;
    for (m, target) in &models {
        let p = loop_profile(m).unwrap();
        let t = solve_riccati(&p, *target, &opts()).unwrap().eval(*target).unwrap();
        let o = riccati_to_linear_oracle(&p, *target, &opts()).unwrap();
        worst = worst.max((t - o).abs());
    }
    ok(worst < 1e-6, format!("max |Riccati - linear oracle| = {worst:.2e} over {} models", models.len()))
}

fn c08() -> Outcome {
    let mut worst: f64 = 0.0;
    for b in builtins() {
        let p = loop_profile(&b.model).unwrap();
        let end = if b.model.periodic { 2.0 * PI } else { 8.0 };
        for q in linspace(0.0, end, 200) {
            worst = worst.max(p.restriction_residual(q).abs());
        }
    }
    ok(worst < 1e-8, format!("max |S1' β S0' + V1| = {worst:.2e}"))
}

fn c09() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut pd = true;
    for b in builtins() {
        let lin = linearize(&b.model).unwrap();
        let scale = lin.a.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        worst = worst.max(lin.riccati_residual() / scale);
        pd &= check_positive_definite(&lin.eu);
    }
    ok(worst < 1e-10 && pd, format!("max |Eu B Eu - A| / |A| = {worst:.2e}, Eu positive definite: {pd}"))
}

fn c10() -> Outcome {
    let mut worst: f64 = 0.0;
    for b in builtins().into_iter().filter(|b| b.model.periodic) {
        let p = loop_profile(&b.model).unwrap();
        let tu = solve_riccati(&p, PI, &opts()).unwrap();
        let ts = solve_riccati_stable(&p, -PI, &opts()).unwrap();
        let via = stable_from_reversibility(&tu, -1.0, -PI).unwrap();
        worst = worst.max((ts.eval(-PI).unwrap() - via).abs());
    }
    ok(worst < 1e-8, format!("max |direct stable - reversed unstable| at q1* = {worst:.2e}"))
}

fn weak(lambda: f64) -> homoclinic::model::PerturbationModel {
    pendula_weak(lambda).unwrap().perturbation.unwrap()
}

fn c11() -> Outcome {
    let pert = weak(1.0);
    let o = MelnikovOptions::default();
    let mut worst: f64 = 0.0;
    for s in [0.5, 1.0, 2.0, 3.0] {
        for s in [s, -s] {
            worst = worst.max((reduced_value(&pert, s, &o).value - melnikov_equal(s)).abs());
        }
    }
    let (d1, d2) = melnikov_derivatives(&pert, &o);
    ok(
        worst < 1e-6 && d1.abs() < 1e-9 && (d2 + 8.0).abs() < 1e-5,
        format!("max |L̃ - closed form| = {worst:.2e}, L̃'(0) = {d1:.2e}, L̃''(0) = {d2:.9}"),
    )
}

fn c12() -> Outcome {
    let l0 = lambda_zero();
    ok((l0 - 3.68078).abs() < 1e-4, format!("λ0 = {l0:.8}"))
}

fn c13() -> Outcome {
    let o = MelnikovOptions::default();
    let grid = linspace(-3.0, 3.0, 13);
    let mut all = true;
    let mut parts = Vec::new();
    for l in [1.0, 1.5, 2.0, 3.0, 3.6] {
        let r = perturbed_loop_verdict(&weak(l), &grid, &o);
        all &= r.ddl0 < 0.0 && r.verdict == MelnikovVerdict::PerturbedLoopTransversal;
        parts.push(format!("λ={l}: {:.4}", r.ddl0));
    }
    ok(all, format!("L̃''(0): {}", parts.join(", ")))
}

fn c14() -> Outcome {
    let (l, s) = (1.5, 0.7);
    let pert = weak(l);
    let o = MelnikovOptions::default();
    let vals: Vec<f64> = [-1.0, 0.0, 1.0]
        .iter()
        .map(|&tau| {
            let x = (pert.loop_family)(tau, s);
            melnikov_potential(&pert, [x[0], x[1]], &o).unwrap().value
        })
        .collect();
    let spread = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut odd: f64 = 0.0;
    for s in [0.3, 0.7, 1.5, 2.5] {
        odd = odd.max((reduced_value(&pert, s, &o).value - reduced_value(&pert, -s, &o).value).abs());
    }
    ok(spread < 1e-8 && odd < 1e-8, format!("spread along loop {spread:.2e}, max |L̃(s) - L̃(-s)| = {odd:.2e}"))
}

fn c15() -> Outcome {
    let p = loop_profile(&neumann(1.0, 2.0).unwrap().model).unwrap();
    let at = |o: RiccatiOptions| solve_riccati(&p, 2.0, &o).unwrap().eval(2.0).unwrap();
    let base = at(opts());
    let halved = at(RiccatiOptions { epsilon: Some(0.5e-4 * 2.0), ..opts() });
    let up = at(RiccatiOptions { initial_offset: 1e-4, ..opts() });
    let down = at(RiccatiOptions { initial_offset: -1e-4, ..opts() });
    let de = (halved - base).abs();
    let dp = (up - base).abs().max((down - base).abs());
    ok(de < 1e-8 && dp < 1e-6, format!("halving ε moves T(2) by {de:.2e}, ±1e-4 start offset by {dp:.2e}"))
}

fn main() {
    let clock = Instant::now();
    let criteria: [(&str, fn() -> Outcome); 15] = [
        ("neumann curvature at q1 = 2", c01),
        ("neumann gap and verdict", c02),
        ("initial value T0", c03),
        ("pendula constant coupling closed form", c04),
        ("pendula zero coupling is tangent", c05),
        ("pendula bracketing and transversality", c06),
        ("linear oracle agreement", c07),
        ("restriction residual", c08),
        ("linearisation Eu B Eu = A", c09),
        ("reversibility of the stable solve", c10),
        ("melnikov equal frequencies", c11),
        ("threshold λ0", c12),
        ("nondegenerate critical point at s = 0", c13),
        ("first integral and evenness", c14),
        ("start-up robustness", c15),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = run();
        if !r.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {} [{:.2}s]",
            k + 1,
            if r.pass { "PASS" } else { "FAIL" },
            r.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of 15 passed in {:.2}s", 15 - failed, clock.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
