//! Moving the stable curvature into the unstable chart and comparing.
//!
//! The stable manifold is known in a chart `(q̃, p̃)` around the target
//! equilibrium. A chart change `q̃ = χ(q)` with `χ(q1, 0) = (χ0(q1), 0)`
//! carries its generating function to `Ŝ(q) = S̃(χ(q))`, and the chain rule
//! at `q2 = 0` gives
//!
//! ```text
//! ∂²Ŝ/∂q2² = Σ ∂S̃/∂q̃i ∂²χi/∂q2² + Σ ∂²S̃/∂q̃i∂q̃j ∂χi/∂q2 ∂χj/∂q2
//! ```

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::loop_profile::LoopProfile;
use crate::riccati::{solve_riccati, RiccatiDiagnostics, RiccatiOptions, RiccatiSolution};

/// Derivatives of `χ` at `(q1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionJet {
    /// `(∂χ1/∂q2, ∂χ2/∂q2)`.
    pub dchi_dq2: [f64; 2],
    /// `(∂²χ1/∂q2², ∂²χ2/∂q2²)`.
    pub d2chi_dq2: [f64; 2],
    pub dchi1_dq1: f64,
}

#[derive(Clone)]
pub struct ChartTransition {
    pub name: String,
    pub chi: Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>,
    pub chi0: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub jet2: Arc<dyn Fn(f64) -> TransitionJet + Send + Sync>,
}

impl fmt::Debug for ChartTransition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartTransition").field("name", &self.name).finish()
    }
}

impl ChartTransition {
    /// Shift by one turn, `χ(q) = (q1 - 2π, q2)`.
    pub fn torus() -> Self {
        Self {
            name: "torus".into(),
            chi: Arc::new(|q| [q[0] - TAU, q[1]]),
            chi0: Arc::new(|q| q - TAU),
            jet2: Arc::new(|_| TransitionJet { dchi_dq2: [0.0, 1.0], d2chi_dq2: [0.0, 0.0], dchi1_dq1: 1.0 }),
        }
    }

    /// Inversion in the circle of radius 2, `χ(q) = 4q / |q|²`, which swaps
    /// the two stereographic charts of the sphere.
    pub fn inversion() -> Self {
        Self {
            name: "inversion".into(),
            chi: Arc::new(|q| {
                let r2 = q[0] * q[0] + q[1] * q[1];
                [4.0 * q[0] / r2, 4.0 * q[1] / r2]
            }),
            chi0: Arc::new(|q| 4.0 / q),
            jet2: Arc::new(|q| TransitionJet {
                dchi_dq2: [0.0, 4.0 / (q * q)],
                d2chi_dq2: [-8.0 / (q * q * q), 0.0],
                dchi1_dq1: -4.0 / (q * q),
            }),
        }
    }

    pub fn jet(&self, q1: f64) -> TransitionJet {
        (self.jet2)(q1)
    }

    /// Largest violation of `χ(q1, 0) = (χ0(q1), 0)` over the sample.
    pub fn line_defect(&self, sample: &[f64]) -> f64 {
        sample
            .iter()
            .map(|&q| {
                let c = (self.chi)([q, 0.0]);
                (c[0] - (self.chi0)(q)).abs().max(c[1].abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Second-order jet of a stable generating function on `q̃2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StableJet {
    pub ds0: f64,
    pub d2s0: f64,
    pub s1: f64,
    pub ds1: f64,
    pub t: f64,
}

/// `∂²Ŝ/∂q2²` at `(q1, 0)`, given the jet of `S̃` at `(χ0(q1), 0)`.
pub fn jet_transport_stable(jet: &StableJet, tj: &TransitionJet) -> f64 {
    let [d1, d2] = tj.dchi_dq2;
    let [dd1, dd2] = tj.d2chi_dq2;
    jet.ds0 * dd1 + jet.s1 * dd2 + jet.d2s0 * d1 * d1 + 2.0 * jet.ds1 * d1 * d2 + jet.t * d2 * d2
}

/// `T^s(q1) = -T^u(r1 q1)` under the reversor `(r1, r2)`.
pub fn stable_from_reversibility(tu: &RiccatiSolution, r1: f64, q1: f64) -> Result<f64> {
    Ok(-tu.eval(r1 * q1)?)
}

/// Stable curvature on the torus, seen from the unstable chart:
/// `T̂^s(q1) = -T^u(2π - q1)` for the reversor `(-1, -1)`.
pub fn torus_stable(tu: &RiccatiSolution, q1: f64) -> Result<f64> {
    Ok(-tu.eval(TAU - q1)?)
}

/// Full stable jet at `q` from the unstable data, `S^s(q) = -S^u(Rq)`.
pub fn stable_jet_from_reversibility(profile: &LoopProfile, tu: &RiccatiSolution, r: (f64, f64), q: f64) -> Result<StableJet> {
    let (r1, r2) = r;
    let p = r1 * q;
    Ok(StableJet {
        ds0: -r1 * profile.ds0(p),
        d2s0: -profile.d2s0(p),
        s1: -r2 * profile.s1(p),
        ds1: -r1 * r2 * profile.ds1(p),
        t: -tu.eval(p)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Transversal,
    Tangent,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerdictTolerances {
    /// Relative gap above which the manifolds are called transversal.
    pub tol: f64,
    /// Relative gap below which they are called tangent.
    pub tangent: f64,
}

impl Default for VerdictTolerances {
    fn default() -> Self {
        Self { tol: 1e-6, tangent: 1e-10 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TransversalityReport {
    pub verdict: Verdict,
    pub q1_star: f64,
    pub tu: f64,
    pub ts_hat: f64,
    pub gap: f64,
    pub tol: f64,
    pub tol_tangent: f64,
    pub route: String,
    /// Relative tolerance of the solve behind the verdict.
    pub rtol_used: f64,
    pub refinements: usize,
    pub riccati: RiccatiDiagnostics,
}

/// Returns `(verdict, gap, tol, tol_tangent)` with both tolerances scaled
/// by `max(1, |tu|, |ts|)`.
pub fn transversality_verdict(tu: f64, ts_hat: f64, tols: &VerdictTolerances) -> (Verdict, f64, f64, f64) {
    let scale = 1f64.max(tu.abs()).max(ts_hat.abs());
    let gap = tu - ts_hat;
    let (tol, tan) = (tols.tol * scale, tols.tangent * scale);
    let v = if gap.abs() > tol {
        Verdict::Transversal
    } else if gap.abs() < tan {
        Verdict::Tangent
    } else {
        Verdict::Inconclusive
    };
    (v, gap, tol, tan)
}

fn reversor(profile: &LoopProfile) -> Result<(f64, f64)> {
    profile
        .model
        .reversibility
        .ok_or_else(|| Error::Unsupported("transversality needs a reversible model for the stable side".into()))
}

/// Periodic case: compare at `q1 = π` using the torus identification.
pub fn torus_transversality(profile: &LoopProfile, opts: &RiccatiOptions, tols: &VerdictTolerances) -> Result<TransversalityReport> {
    if !profile.model.periodic {
        return Err(Error::Unsupported("torus transversality needs a periodic model".into()));
    }
    let (r1, _) = reversor(profile)?;
    if r1 != -1.0 {
        return Err(Error::Unsupported("torus transversality needs r1 = -1".into()));
    }
    verdict_with_refinement(opts, tols, "torus", PI, |o| {
        let sol = solve_riccati(profile, PI, o)?;
        let tu = sol.eval(PI)?;
        let ts_hat = torus_stable(&sol, PI)?;
        Ok((tu, ts_hat, sol))
    })
}

/// Solve, judge, and while the gap sits between the two bands tighten the
/// solver by two orders of magnitude and judge again.
fn verdict_with_refinement<F>(
    opts: &RiccatiOptions,
    tols: &VerdictTolerances,
    route: &str,
    q1_star: f64,
    compute: F,
) -> Result<TransversalityReport>
where
    F: Fn(&RiccatiOptions) -> Result<(f64, f64, RiccatiSolution)>,
{
    let mut o = *opts;
    let mut refinements = 0;
    loop {
        let (tu, ts_hat, sol) = compute(&o)?;
        let (verdict, gap, tol, tol_tangent) = transversality_verdict(tu, ts_hat, tols);
        if verdict != Verdict::Inconclusive || o.rtol <= RTOL_FLOOR {
            return Ok(TransversalityReport {
                verdict,
                q1_star,
                tu,
                ts_hat,
                gap,
                tol,
                tol_tangent,
                route: route.into(),
                rtol_used: o.rtol,
                refinements,
                riccati: sol.diagnostics,
            });
        }
        o.rtol = (o.rtol * 1e-2).max(RTOL_FLOOR);
        o.atol = (o.atol * 1e-2).max(1e-16);
        refinements += 1;
    }
}

const RTOL_FLOOR: f64 = 1e-13;

/// General case: transport the stable jet from the target chart, which is
/// assumed to carry the same model, and compare at `q1_star`.
pub fn chart_transversality(
    profile: &LoopProfile,
    transition: &ChartTransition,
    q1_star: f64,
    opts: &RiccatiOptions,
    tols: &VerdictTolerances,
) -> Result<TransversalityReport> {
    let r = reversor(profile)?;
    let qt = (transition.chi0)(q1_star);
    let reach = q1_star.abs().max(qt.abs());
    profile.model.check_domain(reach)?;
    verdict_with_refinement(opts, tols, &transition.name, q1_star, |o| {
        let sol = solve_riccati(profile, reach, o)?;
        let tu = sol.eval(q1_star)?;
        let jet = stable_jet_from_reversibility(profile, &sol, r, qt)?;
        Ok((tu, jet_transport_stable(&jet, &transition.jet(q1_star)), sol))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transitions_fix_the_line() {
        let s: Vec<f64> = (1..20).map(|k| 0.3 * k as f64).collect();
        assert!(ChartTransition::torus().line_defect(&s) == 0.0);
        assert!(ChartTransition::inversion().line_defect(&s) < 1e-15);
    }

    #[test]
    fn verdict_bands() {
        let t = VerdictTolerances::default();
        assert_eq!(transversality_verdict(1.0, 0.0, &t).0, Verdict::Transversal);
        assert_eq!(transversality_verdict(1.0, 1.0 - 1e-12, &t).0, Verdict::Tangent);
        assert_eq!(transversality_verdict(1.0, 1.0 - 1e-8, &t).0, Verdict::Inconclusive);
    }
}
