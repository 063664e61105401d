//! Closed-form connections and Higgs fields, plus their serializable specs.
//!
//! Connection components A_α are lower-index and returned as coordinates in
//! the orthonormal algebra basis.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, CVec, GroupSpec, Representation};
use crate::error::{LabError, Result};
use crate::geometry::SpacetimePoint;

pub type Coords4 = [Vec<f64>; 4];

pub trait ConnectionField: Send + Sync {
    fn group(&self) -> &GroupSpec;
    fn coords(&self, p: &SpacetimePoint) -> Coords4;

    fn components(&self, p: &SpacetimePoint) -> [AlgebraElement; 4] {
        let c = self.coords(p);
        let g = self.group();
        [0, 1, 2, 3].map(|a| g.from_coords(&c[a]).expect("field matches its group"))
    }

    /// Coordinates of A(v) = A_α v^α.
    fn contract(&self, p: &SpacetimePoint, v: &[f64; 4]) -> Vec<f64> {
        let c = self.coords(p);
        let mut out = vec![0.0; self.group().dim()];
        for a in 0..4 {
            if v[a] != 0.0 {
                for (o, x) in out.iter_mut().zip(&c[a]) {
                    *o += v[a] * x;
                }
            }
        }
        out
    }
}

pub trait HiggsField: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, p: &SpacetimePoint) -> CVec;
}

impl<T: ConnectionField + ?Sized> ConnectionField for Arc<T> {
    fn group(&self) -> &GroupSpec {
        (**self).group()
    }
    fn coords(&self, p: &SpacetimePoint) -> Coords4 {
        (**self).coords(p)
    }
}

impl<T: HiggsField + ?Sized> HiggsField for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, p: &SpacetimePoint) -> CVec {
        (**self).value(p)
    }
}

#[derive(Clone, Debug)]
pub struct ConstantConnection {
    pub group: GroupSpec,
    pub coords: Coords4,
}

impl ConstantConnection {
    pub fn zero(group: &GroupSpec) -> Self {
        let n = group.dim();
        ConstantConnection {
            group: group.clone(),
            coords: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        }
    }
}

impl ConnectionField for ConstantConnection {
    fn group(&self) -> &GroupSpec {
        &self.group
    }
    fn coords(&self, _p: &SpacetimePoint) -> Coords4 {
        self.coords.clone()
    }
}

/// One scalar profile c + ⟨l, x⟩ + b sin(⟨k, x⟩ + φ) + q|x|².
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Profile {
    pub c: f64,
    pub l: [f64; 4],
    pub b: f64,
    pub k: [f64; 4],
    pub phase: f64,
    pub q: f64,
}

impl Profile {
    pub fn eval(&self, p: &SpacetimePoint) -> f64 {
        let dot = |a: &[f64; 4]| a[0] * p[0] + a[1] * p[1] + a[2] * p[2] + a[3] * p[3];
        let r2 = p.iter().map(|x| x * x).sum::<f64>();
        self.c + dot(&self.l) + self.b * (dot(&self.k) + self.phase).sin() + self.q * r2
    }

    fn random<R: Rng>(rng: &mut R, amp: f64) -> Self {
        let mut u = |s: f64| s * (2.0 * rng.gen::<f64>() - 1.0);
        Profile {
            c: u(amp),
            l: [u(amp), u(amp), u(amp), u(amp)],
            b: u(amp),
            k: [u(2.0), u(2.0), u(2.0), u(2.0)],
            phase: u(3.0),
            q: u(0.5 * amp),
        }
    }
}

/// A_α = Σ_i f_{α,i}(x) e_i with smooth scalar profiles.
#[derive(Clone, Debug)]
pub struct SmoothConnection {
    pub group: GroupSpec,
    pub profiles: Vec<Vec<Profile>>,
    pub temporal: bool,
}

impl SmoothConnection {
    pub fn random(group: &GroupSpec, seed: u64, amplitude: f64, temporal: bool) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let profiles = (0..4)
            .map(|_| (0..group.dim()).map(|_| Profile::random(&mut rng, amplitude)).collect())
            .collect();
        SmoothConnection {
            group: group.clone(),
            profiles,
            temporal,
        }
    }
}

impl ConnectionField for SmoothConnection {
    fn group(&self) -> &GroupSpec {
        &self.group
    }
    fn coords(&self, p: &SpacetimePoint) -> Coords4 {
        let mut out: Coords4 = Default::default();
        for (a, o) in out.iter_mut().enumerate() {
            *o = if a == 0 && self.temporal {
                vec![0.0; self.group.dim()]
            } else {
                self.profiles[a].iter().map(|f| f.eval(p)).collect()
            };
        }
        out
    }
}

pub struct FnConnection<F> {
    pub group: GroupSpec,
    pub f: F,
}

impl<F: Fn(&SpacetimePoint) -> Coords4 + Send + Sync> ConnectionField for FnConnection<F> {
    fn group(&self) -> &GroupSpec {
        &self.group
    }
    fn coords(&self, p: &SpacetimePoint) -> Coords4 {
        (self.f)(p)
    }
}

#[derive(Clone, Debug)]
pub struct ConstantHiggs(pub CVec);

impl HiggsField for ConstantHiggs {
    fn dim(&self) -> usize {
        self.0.len()
    }
    fn value(&self, _p: &SpacetimePoint) -> CVec {
        self.0.clone()
    }
}

/// Components are complex polynomials of total degree ≤ 3 in (t, x).
#[derive(Clone, Debug)]
pub struct PolynomialHiggs {
    /// (exponents, coefficient per component)
    pub terms: Vec<([u8; 4], Vec<Complex64>)>,
    pub dim: usize,
}

impl PolynomialHiggs {
    pub fn random(dim: usize, seed: u64, amplitude: f64, offset: &CVec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut terms = Vec::new();
        for deg in 1..=3u8 {
            for e0 in 0..=deg {
                for e1 in 0..=deg - e0 {
                    for e2 in 0..=deg - e0 - e1 {
                        let e3 = deg - e0 - e1 - e2;
                        let s = amplitude / (1.0 + deg as f64);
                        let coeffs = (0..dim)
                            .map(|_| {
                                Complex64::new(
                                    s * (2.0 * rng.gen::<f64>() - 1.0),
                                    s * (2.0 * rng.gen::<f64>() - 1.0),
                                )
                            })
                            .collect();
                        terms.push(([e0, e1, e2, e3], coeffs));
                    }
                }
            }
        }
        terms.push(([0, 0, 0, 0], offset.iter().cloned().collect()));
        PolynomialHiggs { terms, dim }
    }
}

impl HiggsField for PolynomialHiggs {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, p: &SpacetimePoint) -> CVec {
        let mut v = CVec::zeros(self.dim);
        for (e, c) in &self.terms {
            let m: f64 = (0..4).map(|i| p[i].powi(e[i] as i32)).product();
            for (vi, ci) in v.iter_mut().zip(c) {
                *vi += ci * m;
            }
        }
        v
    }
}

/// Real and imaginary parts of each component given by smooth profiles.
#[derive(Clone, Debug)]
pub struct SmoothHiggs {
    pub re: Vec<Profile>,
    pub im: Vec<Profile>,
}

impl SmoothHiggs {
    pub fn random(dim: usize, seed: u64, amplitude: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SmoothHiggs {
            re: (0..dim).map(|_| Profile::random(&mut rng, amplitude)).collect(),
            im: (0..dim).map(|_| Profile::random(&mut rng, amplitude)).collect(),
        }
    }
}

impl HiggsField for SmoothHiggs {
    fn dim(&self) -> usize {
        self.re.len()
    }
    fn value(&self, p: &SpacetimePoint) -> CVec {
        CVec::from_iterator(
            self.re.len(),
            self.re.iter().zip(&self.im).map(|(a, b)| Complex64::new(a.eval(p), b.eval(p))),
        )
    }
}

pub struct FnHiggs<F> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(&SpacetimePoint) -> CVec + Send + Sync> HiggsField for FnHiggs<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, p: &SpacetimePoint) -> CVec {
        (self.f)(p)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConnectionSpec {
    Zero,
    Constant { coords: [Vec<f64>; 4] },
    Smooth { seed: u64, amplitude: f64, #[serde(default)] temporal: bool },
}

impl ConnectionSpec {
    pub fn build(&self, group: &GroupSpec) -> Result<Arc<dyn ConnectionField>> {
        Ok(match self {
            ConnectionSpec::Zero => Arc::new(ConstantConnection::zero(group)),
            ConnectionSpec::Constant { coords } => {
                if coords.iter().any(|c| c.len() != group.dim()) {
                    return Err(LabError::Config(format!(
                        "constant connection needs {} coordinates per component",
                        group.dim()
                    )));
                }
                Arc::new(ConstantConnection { group: group.clone(), coords: coords.clone() })
            }
            ConnectionSpec::Smooth { seed, amplitude, temporal } => {
                Arc::new(SmoothConnection::random(group, *seed, *amplitude, *temporal))
            }
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HiggsSpec {
    Zero,
    Constant { re: Vec<f64>, im: Vec<f64> },
    Polynomial { seed: u64, amplitude: f64 },
    Smooth { seed: u64, amplitude: f64 },
}

impl HiggsSpec {
    pub fn build(&self, rep: &Representation) -> Result<Arc<dyn HiggsField>> {
        let d = rep.dim();
        Ok(match self {
            HiggsSpec::Zero => Arc::new(ConstantHiggs(CVec::zeros(d))),
            HiggsSpec::Constant { re, im } => {
                if re.len() != d || im.len() != d {
                    return Err(LabError::Config(format!("constant Higgs field needs {d} components")));
                }
                Arc::new(ConstantHiggs(CVec::from_iterator(
                    d,
                    re.iter().zip(im).map(|(a, b)| Complex64::new(*a, *b)),
                )))
            }
            HiggsSpec::Polynomial { seed, amplitude } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
                let off = rep.random_vector(&mut rng) * Complex64::from(0.5);
                Arc::new(PolynomialHiggs::random(d, *seed, *amplitude, &off))
            }
            HiggsSpec::Smooth { seed, amplitude } => Arc::new(SmoothHiggs::random(d, *seed, *amplitude)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn temporal_flag_zeroes_time_component() {
        let g = GroupSpec::electroweak();
        let a = SmoothConnection::random(&g, 3, 0.5, true);
        let c = a.coords(&[0.1, 0.2, -0.3, 0.05]);
        assert!(c[0].iter().all(|v| *v == 0.0));
        assert!(c[1].iter().any(|v| *v != 0.0));
    }

    #[test]
    fn specs_round_trip_and_reject_unknown_keys() {
        let s = ConnectionSpec::Smooth { seed: 4, amplitude: 0.3, temporal: true };
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<ConnectionSpec>(&j).unwrap(), s);
        assert!(serde_json::from_str::<ConnectionSpec>(r#"{"kind":"smooth","seed":1,"amplitude":1.0,"x":1}"#).is_err());
    }
}
