//! Compact Lie groups built from U(1)/SU(2)/SU(3) blocks, their
//! representations, and the pairing 𝕁_ρ.
//!
//! Elements are stored block by block. All real coordinates used by this
//! crate are taken in the basis that is orthonormal for ⟨X,Y⟩ = Σ w_f (−tr X_f Y_f).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;
pub type RMat = DMatrix<f64>;

const I: Complex64 = Complex64::new(0.0, 1.0);
const RANK_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Factor {
    U1,
    SU2,
    SU3,
}

impl Factor {
    pub fn size(self) -> usize {
        match self {
            Factor::U1 => 1,
            Factor::SU2 => 2,
            Factor::SU3 => 3,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Factor::U1 => 1,
            Factor::SU2 => 3,
            Factor::SU3 => 8,
        }
    }

    /// Unnormalised generators: i, iσ_k/2, iλ_k/2.
    fn raw_generators(self) -> Vec<CMat> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        match self {
            Factor::U1 => vec![CMat::from_element(1, 1, I)],
            Factor::SU2 => {
                let s1 = [c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)];
                let s2 = [c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)];
                let s3 = [c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)];
                [s1, s2, s3]
                    .iter()
                    .map(|s| CMat::from_row_slice(2, 2, s) * (I * 0.5))
                    .collect()
            }
            Factor::SU3 => gell_mann().into_iter().map(|l| l * (I * 0.5)).collect(),
        }
    }
}

fn gell_mann() -> Vec<CMat> {
    let mut out = Vec::with_capacity(8);
    let sym = |a: usize, b: usize| {
        let mut m = CMat::zeros(3, 3);
        m[(a, b)] = Complex64::new(1.0, 0.0);
        m[(b, a)] = Complex64::new(1.0, 0.0);
        m
    };
    let l1 = sym(0, 1);
    let l4 = sym(0, 2);
    let l6 = sym(1, 2);
    let asym = |a: usize, b: usize| {
        let mut m = CMat::zeros(3, 3);
        m[(a, b)] = -I;
        m[(b, a)] = I;
        m
    };
    let mut l3 = CMat::zeros(3, 3);
    l3[(0, 0)] = 1.0.into();
    l3[(1, 1)] = (-1.0).into();
    let mut l8 = CMat::zeros(3, 3);
    let k = 1.0 / 3f64.sqrt();
    l8[(0, 0)] = k.into();
    l8[(1, 1)] = k.into();
    l8[(2, 2)] = (-2.0 * k).into();
    out.push(l1);
    out.push(asym(0, 1));
    out.push(l3);
    out.push(l4);
    out.push(asym(0, 2));
    out.push(l6);
    out.push(asym(1, 2));
    out.push(l8);
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub factors: Vec<Factor>,
    pub weights: Vec<f64>,
}

impl GroupSpec {
    pub fn new(factors: Vec<Factor>, weights: Vec<f64>) -> Result<Self> {
        if factors.is_empty() {
            return Err(LabError::InvalidGroup("no factors".into()));
        }
        if factors.len() != weights.len() {
            return Err(LabError::InvalidGroup(format!(
                "{} factors but {} weights",
                factors.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(LabError::InvalidGroup(format!("weight {w} is not positive")));
        }
        Ok(GroupSpec { factors, weights })
    }

    pub fn unweighted(factors: Vec<Factor>) -> Self {
        let weights = vec![1.0; factors.len()];
        GroupSpec { factors, weights }
    }

    pub fn u1() -> Self {
        Self::unweighted(vec![Factor::U1])
    }

    pub fn su2() -> Self {
        Self::unweighted(vec![Factor::SU2])
    }

    pub fn electroweak() -> Self {
        Self::unweighted(vec![Factor::SU2, Factor::U1])
    }

    pub fn standard_model() -> Self {
        Self::unweighted(vec![Factor::SU3, Factor::SU2, Factor::U1])
    }

    /// Real dimension of the Lie algebra.
    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim()).sum()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.size()).collect()
    }

    /// (factor index, first coordinate) of every factor.
    pub fn offsets(&self) -> Vec<usize> {
        let mut o = Vec::with_capacity(self.factors.len());
        let mut acc = 0;
        for f in &self.factors {
            o.push(acc);
            acc += f.dim();
        }
        o
    }

    pub fn first(&self, kind: Factor) -> Option<usize> {
        self.factors.iter().position(|f| *f == kind)
    }

    /// Basis orthonormal for the weighted Ad-invariant product.
    pub fn basis(&self) -> Vec<AlgebraElement> {
        let mut out = Vec::with_capacity(self.dim());
        for (fi, (f, w)) in self.factors.iter().zip(&self.weights).enumerate() {
            for g in f.raw_generators() {
                let n2 = -(&g * &g).trace().re * w;
                let mut el = AlgebraElement::zero(self);
                el.blocks[fi] = g / Complex64::from(n2.sqrt());
                out.push(el);
            }
        }
        out
    }

    pub fn inner(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(self
            .weights
            .iter()
            .zip(x.blocks.iter().zip(&y.blocks))
            .map(|(w, (a, b))| -w * (a * b).trace().re)
            .sum())
    }

    pub fn norm(&self, x: &AlgebraElement) -> Result<f64> {
        Ok(self.inner(x, x)?.max(0.0).sqrt())
    }

    pub fn check(&self, x: &AlgebraElement) -> Result<()> {
        check_blocks(&self.block_sizes(), &x.blocks)
    }

    pub fn check_group(&self, g: &GroupElement) -> Result<()> {
        check_blocks(&self.block_sizes(), &g.blocks)
    }

    pub fn coords(&self, x: &AlgebraElement) -> Result<Vec<f64>> {
        self.check(x)?;
        let mut c = Vec::with_capacity(self.dim());
        for (fi, (f, w)) in self.factors.iter().zip(&self.weights).enumerate() {
            for g in f.raw_generators() {
                let n2 = -(&g * &g).trace().re * w;
                let e = g / Complex64::from(n2.sqrt());
                c.push(-w * (&x.blocks[fi] * e).trace().re);
            }
        }
        Ok(c)
    }

    pub fn from_coords(&self, c: &[f64]) -> Result<AlgebraElement> {
        if c.len() != self.dim() {
            return Err(LabError::ShapeMismatch);
        }
        let mut x = AlgebraElement::zero(self);
        for (ci, e) in c.iter().zip(self.basis()) {
            x.axpy(*ci, &e);
        }
        Ok(x)
    }

    pub fn structure(&self) -> Structure {
        Structure::new(self)
    }

    /// exp: 𝔤 → G through the Hermitian eigendecomposition of −iX.
    pub fn exp(&self, x: &AlgebraElement) -> Result<GroupElement> {
        self.check(x)?;
        Ok(GroupElement {
            blocks: x.blocks.iter().map(exp_skew).collect(),
        })
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            blocks: self.block_sizes().into_iter().map(|s| CMat::identity(s, s)).collect(),
        }
    }

    pub fn random_algebra<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> AlgebraElement {
        let c: Vec<f64> = (0..self.dim())
            .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        self.from_coords(&c).expect("dimension is consistent")
    }

    pub fn random_group<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        let x = self.random_algebra(rng, 2.0);
        self.exp(&x).expect("same group")
    }

    /// Orthonormal coordinate basis of the centre Z(𝔤).
    pub fn centre_basis(&self) -> Vec<Vec<f64>> {
        let s = self.structure();
        let n = self.dim();
        // rows: coefficient k of [e_i, e_j] as a linear function of X = Σ x_i e_i
        let mut m = RMat::zeros(n * n, n);
        for j in 0..n {
            for k in 0..n {
                for i in 0..n {
                    m[(j * n + k, i)] = s.f(i, j, k);
                }
            }
        }
        null_space(&m)
    }

    pub fn centre_project(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        let c = self.coords(x)?;
        let mut out = vec![0.0; c.len()];
        for b in self.centre_basis() {
            let t: f64 = b.iter().zip(&c).map(|(a, b)| a * b).sum();
            for (o, bi) in out.iter_mut().zip(&b) {
                *o += t * bi;
            }
        }
        self.from_coords(&out)
    }

    /// X = X_Z + X_⊥ with X_Z central.
    pub fn centre_decompose(&self, x: &AlgebraElement) -> Result<(AlgebraElement, AlgebraElement)> {
        let z = self.centre_project(x)?;
        let perp = x.sub(&z)?;
        Ok((z, perp))
    }

    pub fn is_central(&self, x: &AlgebraElement, tol: f64) -> Result<bool> {
        let (_, perp) = self.centre_decompose(x)?;
        Ok(self.norm(&perp)? <= tol * self.norm(x)?.max(1.0))
    }
}

fn check_blocks(sizes: &[usize], blocks: &[CMat]) -> Result<()> {
    if sizes.len() != blocks.len()
        || sizes
            .iter()
            .zip(blocks)
            .any(|(s, b)| b.nrows() != *s || b.ncols() != *s)
    {
        return Err(LabError::ShapeMismatch);
    }
    Ok(())
}

fn exp_skew(x: &CMat) -> CMat {
    let h = x * (-I);
    let h = (&h + h.adjoint()) * Complex64::from(0.5);
    let eig = SymmetricEigen::new(h);
    let v = eig.eigenvectors;
    let d = CMat::from_diagonal(&eig.eigenvalues.map(|l| (I * l).exp()));
    &v * d * v.adjoint()
}

/// Structure constants f_ijk = ⟨e_k, [e_i, e_j]⟩ in the orthonormal basis.
#[derive(Clone, Debug)]
pub struct Structure {
    n: usize,
    f: Vec<f64>,
}

impl Structure {
    fn new(g: &GroupSpec) -> Self {
        let basis = g.basis();
        let n = basis.len();
        let mut f = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                let b = basis[i].bracket(&basis[j]).expect("same group");
                let c = g.coords(&b).expect("same group");
                for k in 0..n {
                    let v = c[k];
                    f[(i * n + j) * n + k] = if v.abs() < 1e-14 { 0.0 } else { v };
                }
            }
        }
        Structure { n, f }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn f(&self, i: usize, j: usize, k: usize) -> f64 {
        self.f[(i * self.n + j) * self.n + k]
    }

    /// [x, y] in coordinates, accumulated into `out` with factor `s`.
    pub fn bracket_acc(&self, x: &[f64], y: &[f64], s: f64, out: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if y[j] == 0.0 {
                    continue;
                }
                let xy = s * x[i] * y[j];
                let row = &self.f[(i * n + j) * n..(i * n + j + 1) * n];
                for k in 0..n {
                    out[k] += xy * row[k];
                }
            }
        }
    }

    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.bracket_acc(x, y, 1.0, &mut out);
        out
    }

    /// Matrix of ad_x acting on coordinates.
    pub fn ad_matrix(&self, x: &[f64]) -> RMat {
        let n = self.n;
        let mut m = RMat::zeros(n, n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                for k in 0..n {
                    m[(k, j)] += x[i] * self.f(i, j, k);
                }
            }
        }
        m
    }

    pub fn is_abelian(&self) -> bool {
        self.f.iter().all(|v| *v == 0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    pub blocks: Vec<CMat>,
}

impl AlgebraElement {
    pub fn zero(g: &GroupSpec) -> Self {
        AlgebraElement {
            blocks: g.block_sizes().into_iter().map(|s| CMat::zeros(s, s)).collect(),
        }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        let sizes: Vec<usize> = self.blocks.iter().map(|b| b.nrows()).collect();
        check_blocks(&sizes, &other.blocks)
    }

    pub fn bracket(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(AlgebraElement {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a * b - b * a)
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(AlgebraElement {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(AlgebraElement {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        AlgebraElement {
            blocks: self.blocks.iter().map(|b| b * Complex64::from(s)).collect(),
        }
    }

    pub fn axpy(&mut self, a: f64, x: &Self) {
        for (b, xb) in self.blocks.iter_mut().zip(&x.blocks) {
            *b += xb * Complex64::from(a);
        }
    }

    /// Largest deviation from anti-Hermitian (and traceless on SU blocks).
    pub fn algebra_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                let herm = (b + b.adjoint()).norm();
                let tr = if b.nrows() > 1 { b.trace().norm() } else { 0.0 };
                herm.max(tr)
            })
            .fold(0.0, f64::max)
    }

    /// Frobenius norm of all blocks (unweighted).
    pub fn frob(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub blocks: Vec<CMat>,
}

impl GroupElement {
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let sizes: Vec<usize> = self.blocks.iter().map(|b| b.nrows()).collect();
        check_blocks(&sizes, &other.blocks)?;
        Ok(GroupElement {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * b).collect(),
        })
    }

    pub fn inverse(&self) -> Self {
        GroupElement {
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    /// g X g⁻¹.
    pub fn adjoint(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        let sizes: Vec<usize> = self.blocks.iter().map(|b| b.nrows()).collect();
        check_blocks(&sizes, &x.blocks)?;
        Ok(AlgebraElement {
            blocks: self
                .blocks
                .iter()
                .zip(&x.blocks)
                .map(|(g, b)| g * b * g.adjoint())
                .collect(),
        })
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| (b.adjoint() * b - CMat::identity(b.nrows(), b.nrows())).norm())
            .fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RepSpec {
    Adjoint,
    Inclusion,
    Electroweak {
        #[serde(rename = "nY")]
        n_y: i32,
    },
    SmHiggs {
        #[serde(rename = "nY")]
        n_y: i32,
    },
    /// ℂ with e^{iθ} ↦ e^{inθ} through the first U(1) factor.
    Charge { n: i32 },
    DirectSum { parts: Vec<RepSpec> },
}

/// Group and representation as they appear in scenario files:
/// `{"factors": ["SU2", "U1"], "weights": [1, 1], "rep": {"kind": "electroweak", "nY": 3}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub factors: Vec<Factor>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    pub rep: RepSpec,
}

impl ModelSpec {
    pub fn electroweak(n_y: i32) -> Self {
        ModelSpec { factors: vec![Factor::SU2, Factor::U1], weights: None, rep: RepSpec::Electroweak { n_y } }
    }

    pub fn build(&self) -> Result<(GroupSpec, Representation)> {
        let weights = self.weights.clone().unwrap_or_else(|| vec![1.0; self.factors.len()]);
        let g = GroupSpec::new(self.factors.clone(), weights)?;
        let rep = Representation::new(&g, self.rep.clone())?;
        Ok((g, rep))
    }
}

#[derive(Clone, Debug)]
pub struct Representation {
    group: GroupSpec,
    spec: RepSpec,
    dim: usize,
    structure: Structure,
    /// ρ_*(e_i) for the orthonormal basis.
    gens: Vec<CMat>,
}

impl Representation {
    pub fn new(group: &GroupSpec, spec: RepSpec) -> Result<Self> {
        let dim = rep_dim(group, &spec)?;
        let basis = group.basis();
        let structure = group.structure();
        let gens = basis
            .iter()
            .map(|e| rho_star_direct(group, &spec, &structure, e))
            .collect();
        Ok(Representation {
            group: group.clone(),
            spec,
            dim,
            structure,
            gens,
        })
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn spec(&self) -> &RepSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn generators(&self) -> &[CMat] {
        &self.gens
    }

    pub fn rho(&self, g: &GroupElement) -> Result<CMat> {
        self.group.check_group(g)?;
        Ok(rho_direct(&self.group, &self.spec, g))
    }

    pub fn rho_star(&self, x: &AlgebraElement) -> Result<CMat> {
        let c = self.group.coords(x)?;
        Ok(self.rho_star_coords(&c))
    }

    pub fn rho_star_coords(&self, c: &[f64]) -> CMat {
        let mut m = CMat::zeros(self.dim, self.dim);
        for (ci, g) in c.iter().zip(&self.gens) {
            if *ci != 0.0 {
                m += g * Complex64::from(*ci);
            }
        }
        m
    }

    /// ρ_*(X)w without forming the matrix.
    pub fn act_coords(&self, c: &[f64], w: &[Complex64], out: &mut [Complex64]) {
        for (ci, g) in c.iter().zip(&self.gens) {
            if *ci == 0.0 {
                continue;
            }
            for r in 0..self.dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..self.dim {
                    acc += g[(r, k)] * w[k];
                }
                out[r] += acc * *ci;
            }
        }
    }

    /// Coordinates of 𝕁_ρ(v, w): ⟨𝕁_ρ(v,w), X⟩ = Re⟨v, ρ_*(X)w⟩.
    pub fn j_coords(&self, v: &[Complex64], w: &[Complex64]) -> Vec<f64> {
        let mut out = vec![0.0; self.gens.len()];
        self.j_acc(v, w, 1.0, &mut out);
        out
    }

    pub fn j_acc(&self, v: &[Complex64], w: &[Complex64], s: f64, out: &mut [f64]) {
        for (o, g) in out.iter_mut().zip(&self.gens) {
            let mut acc = 0.0;
            for r in 0..self.dim {
                if v[r] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let mut gw = Complex64::new(0.0, 0.0);
                for k in 0..self.dim {
                    gw += g[(r, k)] * w[k];
                }
                acc += (v[r].conj() * gw).re;
            }
            *o += s * acc;
        }
    }

    pub fn j_rho(&self, v: &CVec, w: &CVec) -> Result<AlgebraElement> {
        if v.len() != self.dim || w.len() != self.dim {
            return Err(LabError::ShapeMismatch);
        }
        self.group.from_coords(&self.j_coords(v.as_slice(), w.as_slice()))
    }

    /// No nonzero w is annihilated by all of ρ_*(𝔤).
    pub fn is_fully_charged(&self) -> bool {
        let d = self.dim;
        let n = self.gens.len();
        let mut m = CMat::zeros(n * d, d);
        for (i, g) in self.gens.iter().enumerate() {
            m.view_mut((i * d, 0), (d, d)).copy_from(g);
        }
        complex_rank(&m) == d
    }

    /// dim Ker ρ_*.
    pub fn kernel_dim(&self) -> usize {
        let m = self.rho_star_real_matrix();
        self.gens.len() - real_rank(&m)
    }

    fn rho_star_real_matrix(&self) -> RMat {
        let d = self.dim;
        let n = self.gens.len();
        let mut m = RMat::zeros(2 * d * d, n);
        for (i, g) in self.gens.iter().enumerate() {
            for (k, z) in g.iter().enumerate() {
                m[(2 * k, i)] = z.re;
                m[(2 * k + 1, i)] = z.im;
            }
        }
        m
    }

    /// dim (Z(𝔤) ∩ Ker ρ_*), which is also dim Ker (Ad_* ⊕ ρ_*).
    pub fn centre_kernel_dim(&self) -> usize {
        let n = self.gens.len();
        let rho = self.rho_star_real_matrix();
        let mut m = RMat::zeros(n * n + rho.nrows(), n);
        for j in 0..n {
            for k in 0..n {
                for i in 0..n {
                    m[(j * n + k, i)] = self.structure.f(i, j, k);
                }
            }
        }
        m.view_mut((n * n, 0), (rho.nrows(), n)).copy_from(&rho);
        n - real_rank(&m)
    }

    pub fn centre_meets_kernel_trivially(&self) -> bool {
        self.centre_kernel_dim() == 0
    }

    /// Ad ⊕ ρ is faithful at the Lie algebra level.
    pub fn ad_plus_rho_faithful(&self) -> bool {
        self.centre_kernel_dim() == 0
    }

    pub fn random_vector<R: Rng + ?Sized>(&self, rng: &mut R) -> CVec {
        CVec::from_iterator(
            self.dim,
            (0..self.dim).map(|_| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            }),
        )
    }
}

fn rep_dim(g: &GroupSpec, spec: &RepSpec) -> Result<usize> {
    let need = |kind: Factor, what: &str| {
        g.first(kind).ok_or_else(|| {
            LabError::RepresentationMismatch(format!("{what} needs a {kind:?} factor"))
        })
    };
    Ok(match spec {
        RepSpec::Adjoint => g.dim(),
        RepSpec::Inclusion => g.block_sizes().iter().sum(),
        RepSpec::Electroweak { .. } => {
            need(Factor::SU2, "electroweak")?;
            need(Factor::U1, "electroweak")?;
            2
        }
        RepSpec::SmHiggs { .. } => {
            need(Factor::SU3, "standard-model Higgs")?;
            need(Factor::SU2, "standard-model Higgs")?;
            need(Factor::U1, "standard-model Higgs")?;
            2
        }
        RepSpec::Charge { .. } => {
            need(Factor::U1, "charge")?;
            1
        }
        RepSpec::DirectSum { parts } => {
            if parts.is_empty() {
                return Err(LabError::RepresentationMismatch("empty direct sum".into()));
            }
            let mut s = 0;
            for p in parts {
                s += rep_dim(g, p)?;
            }
            s
        }
    })
}

fn u1_phase(g: &GroupSpec, x: &GroupElement, n: i32) -> Complex64 {
    let u = x.blocks[g.first(Factor::U1).expect("checked")][(0, 0)];
    u.powi(n)
}

fn rho_direct(g: &GroupSpec, spec: &RepSpec, x: &GroupElement) -> CMat {
    match spec {
        RepSpec::Adjoint => {
            let basis = g.basis();
            let n = basis.len();
            let mut m = CMat::zeros(n, n);
            for (j, e) in basis.iter().enumerate() {
                let c = g.coords(&x.adjoint(e).expect("checked")).expect("checked");
                for i in 0..n {
                    m[(i, j)] = c[i].into();
                }
            }
            m
        }
        RepSpec::Inclusion => block_diag(&x.blocks),
        RepSpec::Electroweak { n_y } | RepSpec::SmHiggs { n_y } => {
            let su2 = &x.blocks[g.first(Factor::SU2).expect("checked")];
            su2 * u1_phase(g, x, *n_y)
        }
        RepSpec::Charge { n } => CMat::from_element(1, 1, u1_phase(g, x, *n)),
        RepSpec::DirectSum { parts } => {
            let blocks: Vec<CMat> = parts.iter().map(|p| rho_direct(g, p, x)).collect();
            block_diag(&blocks)
        }
    }
}

fn rho_star_direct(g: &GroupSpec, spec: &RepSpec, s: &Structure, x: &AlgebraElement) -> CMat {
    match spec {
        RepSpec::Adjoint => {
            let c = g.coords(x).expect("checked");
            s.ad_matrix(&c).map(Complex64::from)
        }
        RepSpec::Inclusion => block_diag(&x.blocks),
        RepSpec::Electroweak { n_y } | RepSpec::SmHiggs { n_y } => {
            let su2 = &x.blocks[g.first(Factor::SU2).expect("checked")];
            let u = x.blocks[g.first(Factor::U1).expect("checked")][(0, 0)];
            su2 + CMat::identity(2, 2) * (u * (*n_y as f64))
        }
        RepSpec::Charge { n } => {
            let u = x.blocks[g.first(Factor::U1).expect("checked")][(0, 0)];
            CMat::from_element(1, 1, u * (*n as f64))
        }
        RepSpec::DirectSum { parts } => {
            let blocks: Vec<CMat> = parts.iter().map(|p| rho_star_direct(g, p, s, x)).collect();
            block_diag(&blocks)
        }
    }
}

pub fn block_diag(blocks: &[CMat]) -> CMat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = CMat::zeros(n, n);
    let mut o = 0;
    for b in blocks {
        let k = b.nrows();
        m.view_mut((o, o), (k, k)).copy_from(b);
        o += k;
    }
    m
}

fn real_rank(m: &RMat) -> usize {
    // pad so that rows >= cols and the SVD is thin in the right direction
    let m = if m.nrows() < m.ncols() {
        let mut p = RMat::zeros(m.ncols(), m.ncols());
        p.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
        p
    } else {
        m.clone()
    };
    let sv = m.singular_values();
    let top = sv.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > RANK_TOL * top).count()
}

fn complex_rank(m: &CMat) -> usize {
    let sv = m.clone().singular_values();
    let top = sv.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > RANK_TOL * top).count()
}

/// Orthonormal basis of the right null space.
pub fn null_space(m: &RMat) -> Vec<Vec<f64>> {
    let n = m.ncols();
    let padded = if m.nrows() < n {
        let mut p = RMat::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut out = Vec::new();
    for (k, s) in svd.singular_values.iter().enumerate() {
        if top == 0.0 || *s <= RANK_TOL * top {
            out.push(vt.row(k).iter().cloned().collect());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn su2_bracket_of_basis() {
        let g = GroupSpec::su2();
        let raw = Factor::SU2.raw_generators();
        let x = AlgebraElement { blocks: vec![raw[0].clone()] };
        let y = AlgebraElement { blocks: vec![raw[1].clone()] };
        let z = x.bracket(&y).unwrap();
        // [iσ1/2, iσ2/2] = −iσ3/2
        let want = raw[2].clone() * c(-1.0, 0.0);
        assert!((&z.blocks[0] - want).norm() < 1e-15);
        assert!(g.check(&z).is_ok());
    }

    #[test]
    fn basis_is_orthonormal() {
        for g in [GroupSpec::standard_model(), GroupSpec::new(vec![Factor::SU2, Factor::U1], vec![2.0, 0.5]).unwrap()] {
            let b = g.basis();
            for i in 0..b.len() {
                for j in 0..b.len() {
                    let ip = g.inner(&b[i], &b[j]).unwrap();
                    assert!((ip - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn electroweak_hypercharge_action() {
        let g = GroupSpec::electroweak();
        let rep = Representation::new(&g, RepSpec::Electroweak { n_y: 3 }).unwrap();
        let mut x = AlgebraElement::zero(&g);
        x.blocks[1][(0, 0)] = c(0.0, 1.0);
        let m = rep.rho_star(&x).unwrap();
        let want = CMat::identity(2, 2) * c(0.0, 3.0);
        assert!((m - want).norm() < 1e-14);
    }

    #[test]
    fn u1_pairing_closed_form() {
        let g = GroupSpec::u1();
        let rep = Representation::new(&g, RepSpec::Charge { n: 2 }).unwrap();
        let v = CVec::from_vec(vec![c(0.3, -1.2)]);
        let w = CVec::from_vec(vec![c(-0.7, 0.4)]);
        let j = rep.j_rho(&v, &w).unwrap();
        let im = (v[0].conj() * w[0]).im;
        assert!((j.blocks[0][(0, 0)] - c(0.0, -2.0 * im)).norm() < 1e-14);
    }

    #[test]
    fn exp_of_zero_and_su2_rotation() {
        let g = GroupSpec::su2();
        assert!(g.exp(&AlgebraElement::zero(&g)).unwrap().distance(&g.identity()) < 1e-15);
        // exp(θ iσ3/2) = diag(e^{iθ/2}, e^{-iθ/2})
        let raw = Factor::SU2.raw_generators();
        let x = AlgebraElement { blocks: vec![raw[2].clone() * c(1.3, 0.0)] };
        let u = g.exp(&x).unwrap();
        assert!((u.blocks[0][(0, 0)] - c(0.0, 0.65).exp()).norm() < 1e-14);
        assert!((u.blocks[0][(1, 1)] - c(0.0, -0.65).exp()).norm() < 1e-14);
    }

    #[test]
    fn mismatched_groups_are_rejected() {
        let a = AlgebraElement::zero(&GroupSpec::su2());
        let b = AlgebraElement::zero(&GroupSpec::electroweak());
        assert!(matches!(a.bracket(&b), Err(LabError::ShapeMismatch)));
        assert!(GroupSpec::u1().inner(&a, &a).is_err());
        assert!(GroupSpec::new(vec![], vec![]).is_err());
        assert!(GroupSpec::new(vec![Factor::U1], vec![-1.0]).is_err());
    }

    #[test]
    fn classification_examples() {
        let ew = GroupSpec::electroweak();
        let sm = GroupSpec::standard_model();
        let r = |g: &GroupSpec, s| Representation::new(g, s).unwrap();
        assert!(r(&ew, RepSpec::Electroweak { n_y: 3 }).is_fully_charged());
        assert!(r(&ew, RepSpec::Electroweak { n_y: 3 }).centre_meets_kernel_trivially());
        assert!(!r(&ew, RepSpec::Electroweak { n_y: 0 }).centre_meets_kernel_trivially());
        let smh = r(&sm, RepSpec::SmHiggs { n_y: 3 });
        assert!(smh.is_fully_charged());
        assert_eq!(smh.kernel_dim(), 8);
        assert!(smh.centre_meets_kernel_trivially());
        assert!(!r(&GroupSpec::u1(), RepSpec::Charge { n: 0 }).is_fully_charged());
        assert!(r(&GroupSpec::u1(), RepSpec::Charge { n: 1 }).is_fully_charged());
        assert_eq!(sm.centre_basis().len(), 1);
        assert!(Representation::new(&GroupSpec::su2(), RepSpec::Electroweak { n_y: 1 }).is_err());
    }

    #[test]
    fn random_group_elements_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = GroupSpec::standard_model();
        for _ in 0..20 {
            let u = g.random_group(&mut rng);
            assert!(u.unitarity_defect() < 1e-12);
            // determinant one on SU blocks
            for b in &u.blocks[..2] {
                assert!((b.determinant() - c(1.0, 0.0)).norm() < 1e-12);
            }
        }
    }
}
