//! Linearisation at the equilibrium `O`.
//!
//! With `A = -∂²V(0)` and `B = B(0)`, the equilibrium is hyperbolic when `A`
//! is positive definite. `BA` then has eigenvalues `λ1², λ2²` and the
//! unstable and stable Lagrangian planes are `p = Eu q` and `p = Es q`,
//! `Es = -Eu`, with `Eu` the positive definite solution of `Eu B Eu = A`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::HamiltonianModel;
use crate::numeric::linalg::{self, Mat2};

#[derive(Debug, Clone, Serialize)]
pub struct Linearization {
    pub a: Mat2,
    pub b: Mat2,
    /// Positive characteristic exponents.
    pub lambda: [f64; 2],
    /// Eigenvectors of `BA` as unit columns.
    pub m: Mat2,
    pub n: Mat2,
    pub eu: Mat2,
    pub es: Mat2,
}

impl Linearization {
    /// `max |Eu B Eu - A|`.
    pub fn riccati_residual(&self) -> f64 {
        let r = linalg::mul(&linalg::mul(&self.eu, &self.b), &self.eu);
        linalg::max_abs(&linalg::sub(&r, &self.a))
    }
}

pub fn check_positive_definite(m: &Mat2) -> bool {
    linalg::is_positive_definite(m)
}

/// `A` and `B(0)` read off the coefficient functions.
pub fn equilibrium_matrices(model: &HamiltonianModel) -> Result<(Mat2, Mat2)> {
    let c = &model.coeffs;
    let off = -c.v1.derivative(0.0);
    let a = [[-c.v0.second_derivative(0.0), off], [off, c.y.eval(0.0)]];
    let v = model.eval_coefficients(0.0)?;
    let b = [[v.b110, v.b120], [v.b120, v.b220]];
    if a.iter().chain(b.iter()).flatten().any(|x| !x.is_finite()) {
        return Err(Error::Construction("non-finite matrix entries at the equilibrium".into()));
    }
    Ok((a, b))
}

pub fn linearize(model: &HamiltonianModel) -> Result<Linearization> {
    let (a, b) = equilibrium_matrices(model)?;
    linearize_matrices(a, b)
}

/// Works through `B = L Lᵀ`: `BA = L (LᵀAL) L⁻¹`, and `LᵀAL` is symmetric.
pub fn linearize_matrices(a: Mat2, b: Mat2) -> Result<Linearization> {
    if !check_positive_definite(&a) {
        return Err(Error::NotHyperbolic(format!("A = {a:?} is not positive definite")));
    }
    let l = linalg::cholesky(&b).ok_or_else(|| Error::Construction(format!("B(0) = {b:?} is not positive definite")))?;
    let c = linalg::mul(&linalg::mul(&linalg::transpose(&l), &a), &l);
    let (mu, w) = linalg::symmetric_eigen(&c);
    let mut order = [0usize, 1];
    let mut m = linalg::mul(&l, &w);
    for j in 0..2 {
        let n = m[0][j].hypot(m[1][j]);
        m[0][j] /= n;
        m[1][j] /= n;
    }
    // the direction tangent to q2 = 0 goes first when there is one
    if m[1][1].abs() < 1e-12 && m[1][0].abs() >= 1e-12 {
        order = [1, 0];
    }
    let lambda = [mu[order[0]].sqrt(), mu[order[1]].sqrt()];
    let m = [[m[0][order[0]], m[0][order[1]]], [m[1][order[0]], m[1][order[1]]]];
    let binv = linalg::inverse(&b).expect("positive definite");
    let n = linalg::mul(&binv, &m);
    let minv = linalg::inverse(&m).ok_or_else(|| Error::NotHyperbolic("degenerate eigenvectors".into()))?;
    let raw = linalg::mul(&linalg::mul(&n, &linalg::diag(lambda[0], lambda[1])), &minv);
    let s = 0.5 * (raw[0][1] + raw[1][0]);
    let eu = [[raw[0][0], s], [s, raw[1][1]]];
    let es = [[-eu[0][0], -s], [-s, -eu[1][1]]];
    Ok(Linearization { a, b, lambda, m, n, eu, es })
}
