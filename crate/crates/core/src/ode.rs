//! Classical RK4 with step doubling, shared by every transport.

use crate::algebra::{CMat, RMat};
use crate::error::{LabError, Result};

pub trait State: Clone {
    fn axpy(&mut self, a: f64, x: &Self);
    fn max_diff(&self, other: &Self) -> f64;
}

impl State for Vec<f64> {
    fn axpy(&mut self, a: f64, x: &Self) {
        for (s, v) in self.iter_mut().zip(x) {
            *s += a * v;
        }
    }
    fn max_diff(&self, other: &Self) -> f64 {
        self.iter().zip(other).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl State for RMat {
    fn axpy(&mut self, a: f64, x: &Self) {
        *self += x * a;
    }
    fn max_diff(&self, other: &Self) -> f64 {
        (self - other).amax()
    }
}

impl State for CMat {
    fn axpy(&mut self, a: f64, x: &Self) {
        *self += x * num_complex::Complex64::from(a);
    }
    fn max_diff(&self, other: &Self) -> f64 {
        (self - other).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl State for Vec<CMat> {
    fn axpy(&mut self, a: f64, x: &Self) {
        for (s, v) in self.iter_mut().zip(x) {
            s.axpy(a, v);
        }
    }
    fn max_diff(&self, other: &Self) -> f64 {
        self.iter().zip(other).map(|(a, b)| a.max_diff(b)).fold(0.0, f64::max)
    }
}

pub fn rk4_step<S: State, F: Fn(f64, &S) -> S>(f: &F, t: f64, y: &S, h: f64) -> S {
    let k1 = f(t, y);
    let mut y2 = y.clone();
    y2.axpy(0.5 * h, &k1);
    let k2 = f(t + 0.5 * h, &y2);
    let mut y3 = y.clone();
    y3.axpy(0.5 * h, &k2);
    let k3 = f(t + 0.5 * h, &y3);
    let mut y4 = y.clone();
    y4.axpy(h, &k3);
    let k4 = f(t + h, &y4);
    let mut out = y.clone();
    out.axpy(h / 6.0, &k1);
    out.axpy(h / 3.0, &k2);
    out.axpy(h / 3.0, &k3);
    out.axpy(h / 6.0, &k4);
    out
}

pub fn rk4<S: State, F: Fn(f64, &S) -> S>(f: &F, y0: &S, t0: f64, t1: f64, n: usize) -> S {
    let h = (t1 - t0) / n as f64;
    let mut y = y0.clone();
    for k in 0..n {
        y = rk4_step(f, t0 + k as f64 * h, &y, h);
    }
    y
}

/// Values at the n + 1 uniform nodes.
pub fn rk4_path<S: State, F: Fn(f64, &S) -> S>(f: &F, y0: &S, t0: f64, t1: f64, n: usize) -> Vec<S> {
    let h = (t1 - t0) / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    out.push(y0.clone());
    for k in 0..n {
        let next = rk4_step(f, t0 + k as f64 * h, &out[k], h);
        out.push(next);
    }
    out
}

pub const MAX_STEPS: usize = 1 << 17;

/// Doubles the step count until two successive results agree to `tol` and
/// `defect` of the finer one is at most `tol`.
pub fn rk4_adaptive<S, F, D>(f: &F, y0: &S, t0: f64, t1: f64, tol: f64, defect: D) -> Result<(S, usize)>
where
    S: State,
    F: Fn(f64, &S) -> S,
    D: Fn(&S) -> f64,
{
    if t0 == t1 {
        return Ok((y0.clone(), 0));
    }
    let mut n = 16;
    let mut coarse = rk4(f, y0, t0, t1, n);
    loop {
        let fine = rk4(f, y0, t0, t1, 2 * n);
        let err = fine.max_diff(&coarse);
        let d = defect(&fine);
        if err <= tol && d <= tol {
            return Ok((fine, 2 * n));
        }
        n *= 2;
        if 2 * n > MAX_STEPS {
            return Err(LabError::NoConvergence { steps: n, defect: err.max(d) });
        }
        coarse = fine;
    }
}

/// Composite Simpson rule over uniform samples (even number of intervals).
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    debug_assert!(n % 2 == 0 && n >= 2);
    let mut s = values[0] + values[n];
    for (k, v) in values.iter().enumerate().take(n).skip(1) {
        s += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rk4_exponential() {
        let f = |_t: f64, y: &Vec<f64>| vec![-y[0]];
        let (y, _) = rk4_adaptive(&f, &vec![1.0], 0.0, 2.0, 1e-12, |_| 0.0).unwrap();
        assert!((y[0] - (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let h = 0.25;
        let v: Vec<f64> = (0..=8).map(|k| (k as f64 * h).powi(3)).collect();
        assert!((simpson(&v, h) - 4.0).abs() < 1e-12);
    }
}
