//! 2×2 dense helpers. Matrices are row-major `[[f64; 2]; 2]`.

pub type Mat2 = [[f64; 2]; 2];
pub type Vec2 = [f64; 2];

pub fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
}

pub fn mul_vec(a: &Mat2, v: &Vec2) -> Vec2 {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

pub fn transpose(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

pub fn det(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub fn inverse(a: &Mat2) -> Option<Mat2> {
    let d = det(a);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    Some([[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]])
}

pub fn diag(a: f64, b: f64) -> Mat2 {
    [[a, 0.0], [0.0, b]]
}

pub fn max_abs(a: &Mat2) -> f64 {
    a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
}

pub fn sub(a: &Mat2, b: &Mat2) -> Mat2 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j] - b[i][j]))
}

/// Positive definiteness of the symmetric part, by leading minors.
pub fn is_positive_definite(a: &Mat2) -> bool {
    let off = 0.5 * (a[0][1] + a[1][0]);
    a[0][0] > 0.0 && a[0][0] * a[1][1] - off * off > 0.0
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(a: &Mat2) -> Option<Mat2> {
    if !is_positive_definite(a) {
        return None;
    }
    let l11 = a[0][0].sqrt();
    let l21 = a[1][0] / l11;
    let l22 = (a[1][1] - l21 * l21).sqrt();
    Some([[l11, 0.0], [l21, l22]])
}

/// Eigen-decomposition of a symmetric matrix: ascending eigenvalues and
/// unit eigenvectors as columns.
pub fn symmetric_eigen(a: &Mat2) -> (Vec2, Mat2) {
    let (p, r, s) = (a[0][0], 0.5 * (a[0][1] + a[1][0]), a[1][1]);
    let mean = 0.5 * (p + s);
    let rad = (0.5 * (p - s)).hypot(r);
    let lo = mean - rad;
    let hi = mean + rad;
    let vec_for = |l: f64| -> Vec2 {
        // pick the better conditioned of the two null-vector candidates
        let c1 = [r, l - p];
        let c2 = [l - s, r];
        let c = if c1[0].hypot(c1[1]) >= c2[0].hypot(c2[1]) { c1 } else { c2 };
        let n = c[0].hypot(c[1]);
        if n == 0.0 {
            [f64::NAN, f64::NAN]
        } else {
            [c[0] / n, c[1] / n]
        }
    };
    let (v1, v2) = if rad == 0.0 {
        ([1.0, 0.0], [0.0, 1.0])
    } else {
        let v1 = vec_for(lo);
        (v1, [-v1[1], v1[0]])
    };
    ([lo, hi], [[v1[0], v2[0]], [v1[1], v2[1]]])
}
