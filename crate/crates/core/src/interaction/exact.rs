//! The U(1), charge-one interaction calculus over an arbitrary real scalar,
//! so the same formulas run in f64 and in exact rationals. Rational test
//! points need rational a(r) = √(1 − r²), i.e. Pythagorean pairs such as
//! r = s = 3/5, a = 4/5.
//!
//! With the orthonormal basis e = i of 𝔲(1), ρ_*(x e) = i x and
//! 𝕁(v, w) = Re(v̄ i w).

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive};

pub trait Real: Clone + Num + Neg<Output = Self> + Debug {
    fn from_i64(v: i64) -> Self;
    /// Equality for input validation; floats get a rounding allowance.
    fn agrees(&self, other: &Self) -> bool {
        self == other
    }
}

impl Real for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn agrees(&self, other: &Self) -> bool {
        (self - other).abs() <= 1e-12 * (1.0 + other.abs())
    }
}

impl Real for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
}

type C<T> = Complex<T>;
type V4<T> = [T; 4];

fn c<T: Real>(x: T) -> C<T> {
    C::new(x, T::zero())
}

fn i_unit<T: Real>() -> C<T> {
    C::new(T::zero(), T::one())
}

fn pairing<T: Real>(a: &V4<T>, b: &V4<T>) -> T {
    -(a[0].clone() * b[0].clone()) + a[1].clone() * b[1].clone() + a[2].clone() * b[2].clone() + a[3].clone() * b[3].clone()
}

fn scale<T: Real>(k: &T, v: &V4<T>) -> V4<T> {
    [0, 1, 2, 3].map(|i| k.clone() * v[i].clone())
}

fn add<T: Real>(a: &V4<T>, b: &V4<T>) -> V4<T> {
    [0, 1, 2, 3].map(|i| a[i].clone() + b[i].clone())
}

fn j<T: Real>(v: &C<T>, w: &C<T>) -> T {
    (v.conj() * i_unit::<T>() * w.clone()).re
}

/// ρ_*(x)w = i x w.
fn act<T: Real>(x: &T, w: &C<T>) -> C<T> {
    i_unit::<T>() * c(x.clone()) * w.clone()
}

#[derive(Clone, Debug)]
pub struct ExactInputs<T> {
    pub r: T,
    pub s: T,
    /// a(r) and a(s); must satisfy a² = 1 − r², 1 − s².
    pub a_r: T,
    pub a_s: T,
    pub b2: T,
    pub b3: T,
    pub upsilon1: C<T>,
}

#[derive(Clone, Debug)]
pub struct ExactOutputs<T> {
    pub kappa: [T; 3],
    pub sigma_inv: [T; 3],
    /// Ŵ_(kl), lower-index, pairs (12), (13), (23).
    pub w_pair: [V4<T>; 3],
    pub y_pair: [C<T>; 3],
    pub w_triple: V4<T>,
    pub y_triple_assembled: C<T>,
    pub y_triple_display: C<T>,
    pub limit: C<T>,
}

/// Returns `None` when the inputs are inconsistent (a² ≠ 1 − r²) or a
/// symbol is characteristic.
pub fn run<T: Real>(inp: &ExactInputs<T>) -> Option<ExactOutputs<T>> {
    let one = T::one();
    let two = T::from_i64(2);
    let (r, s, ar, as_) = (inp.r.clone(), inp.s.clone(), inp.a_r.clone(), inp.a_s.clone());
    let consistent = |a: &T, x: &T| (a.clone() * a.clone() + x.clone() * x.clone()).agrees(&one);
    if !(consistent(&ar, &r) && consistent(&as_, &s)) || s.is_zero() || (one.clone() - as_.clone()).is_zero() {
        return None;
    }
    let q = (one.clone() + ar.clone()) / (one.clone() - as_.clone());
    let rs = r.clone() / (two.clone() * s.clone());
    let kappa = [one.clone() - q.clone(), q.clone() / two.clone() + rs.clone(), q / two.clone() - rs];
    let z = T::zero();
    let xi = [
        [one.clone(), one.clone(), z.clone(), z.clone()],
        [one.clone(), as_.clone(), s.clone(), z.clone()],
        [one.clone(), as_.clone(), -s.clone(), z.clone()],
    ];
    let omega = [
        [z.clone(), z.clone(), z.clone(), z.clone()],
        [s.clone(), z.clone(), one.clone(), z.clone()],
        [-s.clone(), z.clone(), one.clone(), z.clone()],
    ];
    let eta_k = [0, 1, 2].map(|k| scale(&kappa[k], &xi[k]));
    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
    let eta_pair = pairs.map(|(k, l)| add(&eta_k[k], &eta_k[l]));
    let mut sigma_inv = [z.clone(), z.clone(), z.clone()];
    for p in 0..3 {
        let q = pairing(&eta_pair[p], &eta_pair[p]);
        if q.is_zero() {
            return None;
        }
        sigma_inv[p] = one.clone() / q;
    }
    let b = [z.clone(), inp.b2.clone(), inp.b3.clone()];
    // Ŵ_(k) = ω_(k) b_(k)
    let w_hat: [V4<T>; 3] = [0, 1, 2].map(|k| scale(&b[k], &omega[k]));
    let cz = c(z.clone());
    let y_hat = [inp.upsilon1.clone(), cz.clone(), cz.clone()];
    let ii = i_unit::<T>();

    let mut w_pair: [V4<T>; 3] = [0, 1, 2].map(|_| [z.clone(), z.clone(), z.clone(), z.clone()]);
    let mut y_pair = [cz.clone(), cz.clone(), cz.clone()];
    for (p, &(k, l)) in pairs.iter().enumerate() {
        let h = act(&pairing(&eta_k[k], &w_hat[l]), &y_hat[k]) + act(&pairing(&eta_k[l], &w_hat[k]), &y_hat[l]);
        y_pair[p] = ii.clone() * c(two.clone() * sigma_inv[p].clone()) * h;
        let jk = j(&(ii.clone() * y_hat[k].clone()), &y_hat[l]);
        let jl = j(&(ii.clone() * y_hat[l].clone()), &y_hat[k]);
        for al in 0..4 {
            w_pair[p][al] = -(sigma_inv[p].clone() * (eta_k[k][al].clone() * jk.clone() + eta_k[l][al].clone() * jl.clone()));
        }
    }

    let mut h = cz.clone();
    let mut w: V4<T> = [z.clone(), z.clone(), z.clone(), z.clone()];
    for (m, p) in [(2usize, 0usize), (1, 1), (0, 2)] {
        let (k, l) = pairs[p];
        h = h + ii.clone() * act(&pairing(&eta_pair[p], &w_hat[m]), &y_pair[p]);
        h = h + ii.clone() * act(&pairing(&eta_k[m], &w_pair[p]), &y_hat[m]);
        // ρ_*(Ŵ_k^α)ρ_*(Ŵ_{l,α}) = −Ŵ_k·Ŵ_l for a scalar i-valued algebra
        let ww = pairing(&w_hat[k], &w_hat[l]);
        h = h + c(-(two.clone() * ww)) * y_hat[m].clone();
        let inner = (y_hat[k].conj() * y_hat[l].clone()).re;
        h = h + c(two.clone() * inner) * y_hat[m].clone();

        let ja = j(&(ii.clone() * y_pair[p].clone()), &y_hat[m]);
        let jb = j(&(ii.clone() * y_hat[m].clone()), &y_pair[p]);
        for al in 0..4 {
            w[al] = w[al].clone() - (eta_pair[p][al].clone() * ja.clone() + eta_k[m][al].clone() * jb.clone());
            for (u, v) in [(k, l), (l, k)] {
                w[al] = w[al].clone() - j(&act(&w_hat[m][al], &y_hat[u]), &y_hat[v]);
            }
        }
    }

    let s2 = s.clone() * s.clone();
    let (k1, k2, k3) = (kappa[0].clone(), kappa[1].clone(), kappa[2].clone());
    let coeff = -(ii.clone() * c(two.clone() * k1.clone() * (k1.clone() + two.clone() * k3) * s2.clone() * sigma_inv[1].clone()))
        - ii.clone() * c(two.clone() * k1.clone() * (k1 + two.clone() * k2) * s2.clone() * sigma_inv[0].clone())
        + c(two.clone() * (one + s2));
    let bb = act(&inp.b2, &act(&inp.b3, &inp.upsilon1));
    let limit = c(two) * act(&inp.b3, &act(&inp.b2, &inp.upsilon1));
    Some(ExactOutputs {
        kappa,
        sigma_inv,
        w_pair,
        y_pair,
        w_triple: w,
        y_triple_assembled: h,
        y_triple_display: coeff * bb,
        limit,
    })
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn to_c64(x: &C<BigRational>) -> num_complex::Complex64 {
    num_complex::Complex64::new(to_f64(&x.re), to_f64(&x.im))
}

/// The standard rational test point r = s = 3/5 with b₂ = 2, b₃ = −3/2,
/// υ₁ = 1 + 2i.
pub fn standard_inputs() -> ExactInputs<BigRational> {
    ExactInputs {
        r: rational(3, 5),
        s: rational(3, 5),
        a_r: rational(4, 5),
        a_s: rational(4, 5),
        b2: rational(2, 1),
        b3: rational(-3, 2),
        upsilon1: Complex::new(rational(1, 1), rational(2, 1)),
    }
}

pub fn to_float_inputs(x: &ExactInputs<BigRational>) -> ExactInputs<f64> {
    ExactInputs {
        r: to_f64(&x.r),
        s: to_f64(&x.s),
        a_r: to_f64(&x.a_r),
        a_s: to_f64(&x.a_s),
        b2: to_f64(&x.b2),
        b3: to_f64(&x.b3),
        upsilon1: Complex::new(to_f64(&x.upsilon1.re), to_f64(&x.upsilon1.im)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn algebraic_zeros_are_exact() {
        let out = run(&standard_inputs()).unwrap();
        assert!(out.w_pair.iter().flatten().all(|x| x.is_zero()));
        assert!(out.w_triple.iter().all(|x| x.is_zero()));
        assert!(out.y_pair[2].is_zero());
        // κ at r = s = 3/5: q = 9, so κ = (−8, 5, 4)
        assert_eq!(out.kappa, [rational(-8, 1), rational(5, 1), rational(4, 1)]);
    }

    #[test]
    fn inconsistent_a_is_rejected() {
        let mut inp = standard_inputs();
        inp.a_r = rational(3, 4);
        assert!(run(&inp).is_none());
        let mut fl = to_float_inputs(&standard_inputs());
        assert!(run(&fl).is_some());
        fl.a_r = 0.75;
        assert!(run(&fl).is_none());
    }
}
