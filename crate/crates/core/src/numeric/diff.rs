//! Central finite differences, fourth order.

pub fn first_step(q: f64) -> f64 {
    1e-6 * q.abs().max(1.0)
}

pub fn derivative<F: Fn(f64) -> f64 + ?Sized>(f: &F, q: f64, h: f64) -> f64 {
    (f(q - 2.0 * h) - 8.0 * f(q - h) + 8.0 * f(q + h) - f(q + 2.0 * h)) / (12.0 * h)
}

/// Second derivative from function values. Uses a wider step than
/// [`first_step`] since roundoff scales like `eps / h^2`.
pub fn second_derivative<F: Fn(f64) -> f64 + ?Sized>(f: &F, q: f64) -> f64 {
    let h = 1e-3 * q.abs().max(1.0);
    (-f(q - 2.0 * h) + 16.0 * f(q - h) - 30.0 * f(q) + 16.0 * f(q + h) - f(q + 2.0 * h)) / (12.0 * h * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_trig() {
        let d = derivative(&f64::sin, 0.7, first_step(0.7));
        assert!((d - 0.7f64.cos()).abs() < 1e-9);
        let dd = second_derivative(&f64::sin, 0.7);
        assert!((dd + 0.7f64.sin()).abs() < 1e-9);
    }
}
