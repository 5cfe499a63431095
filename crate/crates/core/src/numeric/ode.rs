//! Dormand–Prince 5(4) with step-size control and the native fourth-order
//! continuous extension.
//!
//! States are fixed-size arrays. The integrator runs in either direction of
//! the independent variable; dense output covers the whole travelled span.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Zero means automatic.
    pub initial_step: f64,
    pub max_step: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-9, atol: 1e-12, max_steps: 200_000, initial_step: 0.0, max_step: f64::INFINITY }
    }
}

/// One accepted step together with its interpolation coefficients.
#[derive(Debug, Clone, Copy)]
pub struct Segment<const N: usize> {
    pub t0: f64,
    pub h: f64,
    rc: [[f64; N]; 5],
}

impl<const N: usize> Segment<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn contains(&self, t: f64) -> bool {
        let (a, b) = if self.h >= 0.0 { (self.t0, self.t1()) } else { (self.t1(), self.t0) };
        t >= a && t <= b
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let [r1, r2, r3, r4, r5] = &self.rc;
        std::array::from_fn(|i| r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i]))))
    }

    pub fn eval_derivative(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let [_, r2, r3, r4, r5] = &self.rc;
        std::array::from_fn(|i| {
            (r2[i]
                + (1.0 - 2.0 * th) * r3[i]
                + th * (2.0 - 3.0 * th) * r4[i]
                + 2.0 * th * (1.0 - th) * (1.0 - 2.0 * th) * r5[i])
                / self.h
        })
    }
}

/// Piecewise dense output over the travelled span, ordered by integration.
#[derive(Debug, Clone)]
pub struct DenseOutput<const N: usize> {
    pub segments: Vec<Segment<N>>,
}

impl<const N: usize> DenseOutput<N> {
    pub fn start(&self) -> f64 {
        self.segments.first().map(|s| s.t0).unwrap_or(f64::NAN)
    }

    pub fn end(&self) -> f64 {
        self.segments.last().map(|s| s.t1()).unwrap_or(f64::NAN)
    }

    fn locate(&self, t: f64) -> Option<&Segment<N>> {
        if self.segments.is_empty() {
            return None;
        }
        let forward = self.segments[0].h >= 0.0;
        // segments are monotone in t, so a binary search on the far end works
        let idx = self.segments.partition_point(|s| if forward { s.t1() < t } else { s.t1() > t });
        let seg = self.segments.get(idx.min(self.segments.len() - 1))?;
        if seg.contains(t) {
            Some(seg)
        } else {
            None
        }
    }

    pub fn eval(&self, t: f64) -> Option<[f64; N]> {
        self.locate(t).map(|s| s.eval(t))
    }

    pub fn eval_derivative(&self, t: f64) -> Option<[f64; N]> {
        self.locate(t).map(|s| s.eval_derivative(t))
    }

    pub fn steps(&self) -> usize {
        self.segments.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Final state of an integration run.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub dense: DenseOutput<N>,
    pub rejected: usize,
    pub evaluations: usize,
    pub stopped: bool,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

fn norm<const N: usize>(v: &[f64; N], y0: &[f64; N], y1: &[f64; N], o: &OdeOptions) -> f64 {
    let s: f64 = (0..N)
        .map(|i| {
            let sk = o.atol + o.rtol * y0[i].abs().max(y1[i].abs());
            (v[i] / sk).powi(2)
        })
        .sum();
    (s / N as f64).sqrt()
}

fn initial_step<const N: usize, F>(f: &F, t0: f64, y0: &[f64; N], f0: &[f64; N], dir: f64, o: &OdeOptions) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let d0 = norm(y0, y0, y0, o);
    let d1 = norm(f0, y0, y0, o);
    let mut h = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(o.max_step);
    let y1 = axpy(y0, dir * h, &[(1.0, f0)]);
    let f1 = f(t0 + dir * h, &y1);
    let diff: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = norm(&diff, y0, y0, o) / h;
    let m = d1.max(d2);
    let h1 = if m <= 1e-15 { (h * 1e-3).max(1e-6) } else { (0.01 / m).powf(0.2) };
    (100.0 * h).min(h1).min(o.max_step)
}

/// Integrate `y' = f(t, y)` from `t0` towards `t1`. The observer sees each
/// accepted segment and may stop early.
pub fn integrate<const N: usize, F, O>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: &OdeOptions,
    mut observe: O,
) -> Result<Trajectory<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    O: FnMut(&Segment<N>, &[f64; N]) -> Control,
{
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut evals = 1;
    if !k1.iter().all(|v| v.is_finite()) {
        return Err(Error::Integration { at: t, reason: "non-finite derivative at start".into() });
    }
    let mut h = if opts.initial_step > 0.0 {
        opts.initial_step
    } else {
        evals += 1;
        initial_step(&f, t0, &y0, &k1, dir, opts)
    };
    h = h.min(span.max(f64::MIN_POSITIVE));
    let mut dense = DenseOutput { segments: Vec::new() };
    let mut rejected = 0;
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;
    const BETA: f64 = 0.04;
    const SAFE: f64 = 0.9;

    if span == 0.0 {
        return Ok(Trajectory { t, y, dense, rejected, evaluations: evals, stopped: false });
    }

    for _ in 0..opts.max_steps {
        let remaining = (t1 - t).abs();
        let mut last = false;
        if h >= remaining * (1.0 - 1e-12) {
            h = remaining;
            last = true;
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::Integration { at: t, reason: format!("step size underflow (h = {h:e})") });
        }
        let hs = dir * h;
        let k2 = f(t + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]));
        let k3 = f(t + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(t + C5 * hs, &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(t + hs, &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let ynew = axpy(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let tnew = if last { t1 } else { t + hs };
        let k7 = f(tnew, &ynew);
        evals += 6;

        let finite = ynew.iter().chain(k7.iter()).all(|v| v.is_finite());
        let err = if finite {
            let e: [f64; N] = std::array::from_fn(|i| {
                hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            });
            norm(&e, &y, &ynew, opts)
        } else {
            f64::INFINITY
        };

        if err <= 1.0 {
            let ydiff: [f64; N] = std::array::from_fn(|i| ynew[i] - y[i]);
            let bspl: [f64; N] = std::array::from_fn(|i| hs * k1[i] - ydiff[i]);
            let rc = [
                y,
                ydiff,
                bspl,
                std::array::from_fn(|i| ydiff[i] - hs * k7[i] - bspl[i]),
                std::array::from_fn(|i| {
                    hs * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
                }),
            ];
            let seg = Segment { t0: t, h: tnew - t, rc };
            dense.segments.push(seg);
            t = tnew;
            y = ynew;
            k1 = k7;
            if observe(&seg, &y) == Control::Stop {
                return Ok(Trajectory { t, y, dense, rejected, evaluations: evals, stopped: true });
            }
            if last {
                return Ok(Trajectory { t, y, dense, rejected, evaluations: evals, stopped: false });
            }
            let fac11 = err.powf(0.2 - BETA * 0.75);
            let mut fac = fac11 / facold.powf(BETA);
            fac = (fac / SAFE).clamp(0.1, 5.0);
            let mut hnew = h / fac;
            if last_rejected {
                hnew = hnew.min(h);
            }
            facold = err.max(1e-4);
            h = hnew.min(opts.max_step);
            last_rejected = false;
        } else {
            rejected += 1;
            last_rejected = true;
            h = if err.is_finite() { h / (err.powf(0.2) / SAFE).min(5.0) } else { h * 0.25 };
        }
    }
    Err(Error::Integration { at: t, reason: format!("step budget of {} exhausted", opts.max_steps) })
}
