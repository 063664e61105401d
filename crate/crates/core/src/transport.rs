//! Parallel transport along light rays and the broken light-ray transforms.
//!
//! The coupled transport acts on (𝔤 ⊗ T*) ⊕ 𝒲 and solves
//!
//!   ẇ_β + [A(γ̇), w_β] + ½ γ̇_β 𝕁_ρ(υ, Φ(γ)) = 0,   υ̇ + ρ_*(A(γ̇)) υ = 0,
//!
//! whose upper-right block is −½ P^Ad ∫ γ̇_β 𝕁_ρ(υ, ρ(U(s))⁻¹Φ(γ(s))) ds.
//! Real coordinates are ordered (w₀, w₁, w₂, w₃, Re υ, Im υ).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, CMat, CVec, GroupElement, RMat, RepSpec, Representation};
use crate::error::{LabError, Result};
use crate::fields::{ConnectionField, HiggsField};
use crate::geometry::{self, flip, is_lightlike, SpacetimePoint};
use crate::ode::{rk4_adaptive, rk4_path, simpson};

pub const LIGHTLIKE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LightRay {
    pub base: SpacetimePoint,
    /// Tangent γ̇ (upper index).
    pub velocity: [f64; 4],
    pub t1: f64,
    pub t2: f64,
}

impl LightRay {
    pub fn new(base: SpacetimePoint, velocity: [f64; 4], t1: f64, t2: f64) -> Result<Self> {
        if !is_lightlike(&velocity, LIGHTLIKE_TOL) {
            return Err(LabError::NotLightlike(geometry::pairing(&velocity, &velocity)));
        }
        if !(t1 <= t2) {
            return Err(LabError::DegenerateGeometry(format!("interval [{t1}, {t2}] is reversed")));
        }
        Ok(LightRay { base, velocity, t1, t2 })
    }

    /// γ(t) = p + t(q − p), t ∈ [0, 1].
    pub fn through(p: &SpacetimePoint, q: &SpacetimePoint) -> Result<Self> {
        Self::new(*p, geometry::sub(q, p), 0.0, 1.0)
    }

    pub fn point(&self, t: f64) -> SpacetimePoint {
        geometry::add(&self.base, &geometry::scale(t, &self.velocity))
    }

    pub fn start(&self) -> SpacetimePoint {
        self.point(self.t1)
    }

    pub fn end(&self) -> SpacetimePoint {
        self.point(self.t2)
    }

    /// γ̇_β.
    pub fn lowered_velocity(&self) -> [f64; 4] {
        flip(&self.velocity)
    }

    /// t ↦ γ(λt), same image and endpoints.
    pub fn reparametrized(&self, lambda: f64) -> Result<Self> {
        if lambda <= 0.0 {
            return Err(LabError::DegenerateGeometry("reparametrization must preserve orientation".into()));
        }
        Self::new(self.base, geometry::scale(lambda, &self.velocity), self.t1 / lambda, self.t2 / lambda)
    }

    pub fn split(&self, tm: f64) -> Result<(Self, Self)> {
        Ok((
            Self::new(self.base, self.velocity, self.t1, tm)?,
            Self::new(self.base, self.velocity, tm, self.t2)?,
        ))
    }
}

pub fn combine(basis: &[AlgebraElement], c: &[f64]) -> AlgebraElement {
    let mut x = AlgebraElement {
        blocks: basis[0].blocks.iter().map(|b| CMat::zeros(b.nrows(), b.ncols())).collect(),
    };
    for (ci, e) in c.iter().zip(basis) {
        if *ci != 0.0 {
            x.axpy(*ci, e);
        }
    }
    x
}

/// u̇ + A(γ̇)u = 0, u(t₁) = Id; returns u(t₂).
pub fn transport_group<A: ConnectionField + ?Sized>(a: &A, ray: &LightRay, tol: f64) -> Result<GroupElement> {
    let basis = a.group().basis();
    let f = |t: f64, u: &Vec<CMat>| -> Vec<CMat> {
        let x = combine(&basis, &a.contract(&ray.point(t), &ray.velocity));
        x.blocks.iter().zip(u).map(|(xb, ub)| -(xb * ub)).collect()
    };
    let id = a.group().identity();
    let (u, _) = rk4_adaptive(&f, &id.blocks, ray.t1, ray.t2, tol, |u| {
        GroupElement { blocks: u.clone() }.unitarity_defect()
    })?;
    Ok(GroupElement { blocks: u })
}

/// Group transport sampled on `m` uniform steps (m + 1 nodes).
pub fn transport_group_path<A: ConnectionField + ?Sized>(a: &A, ray: &LightRay, m: usize) -> Vec<GroupElement> {
    let basis = a.group().basis();
    let f = |t: f64, u: &Vec<CMat>| -> Vec<CMat> {
        let x = combine(&basis, &a.contract(&ray.point(t), &ray.velocity));
        x.blocks.iter().zip(u).map(|(xb, ub)| -(xb * ub)).collect()
    };
    rk4_path(&f, &a.group().identity().blocks, ray.t1, ray.t2, m)
        .into_iter()
        .map(|blocks| GroupElement { blocks })
        .collect()
}

/// v̇ + ρ_*(A(γ̇))v = 0 integrated directly on End(𝒲).
pub fn transport_rep<A: ConnectionField + ?Sized>(a: &A, rep: &Representation, ray: &LightRay, tol: f64) -> Result<CMat> {
    check_group(a, rep)?;
    let f = |t: f64, u: &CMat| -> CMat {
        let m = rep.rho_star_coords(&a.contract(&ray.point(t), &ray.velocity));
        -(m * u)
    };
    let d = rep.dim();
    let (u, _) = rk4_adaptive(&f, &CMat::identity(d, d), ray.t1, ray.t2, tol, |u| {
        (u.adjoint() * u - CMat::identity(d, d)).norm()
    })?;
    Ok(u)
}

fn check_group<A: ConnectionField + ?Sized>(a: &A, rep: &Representation) -> Result<()> {
    if a.group() != rep.group() {
        return Err(LabError::RepresentationMismatch("connection and representation use different groups".into()));
    }
    Ok(())
}

/// Transport of the coupled system as a real (4n + 2d)-square matrix.
#[derive(Clone, Debug)]
pub struct BlockTransport {
    pub n: usize,
    pub d: usize,
    pub m: RMat,
}

impl BlockTransport {
    pub fn p_ad(&self) -> RMat {
        self.m.view((0, 0), (self.n, self.n)).into_owned()
    }

    pub fn p_rho(&self) -> CMat {
        let (n4, d) = (4 * self.n, self.d);
        CMat::from_fn(d, d, |i, j| Complex64::new(self.m[(n4 + i, n4 + j)], self.m[(n4 + d + i, n4 + j)]))
    }

    /// n × 2d real block mapping (Re υ, Im υ) to w_β.
    pub fn block12(&self, beta: usize) -> RMat {
        self.m.view((beta * self.n, 4 * self.n), (self.n, 2 * self.d)).into_owned()
    }

    pub fn apply_block12(&self, beta: usize, v: &CVec) -> Vec<f64> {
        let r = cvec_to_real(v);
        (self.block12(beta) * r).iter().cloned().collect()
    }

    pub fn lower_left(&self) -> RMat {
        self.m.view((4 * self.n, 0), (2 * self.d, 4 * self.n)).into_owned()
    }

    /// self ∘ earlier.
    pub fn compose(&self, earlier: &BlockTransport) -> Result<BlockTransport> {
        if self.n != earlier.n || self.d != earlier.d {
            return Err(LabError::ShapeMismatch);
        }
        Ok(BlockTransport { n: self.n, d: self.d, m: &self.m * &earlier.m })
    }

    pub fn max_diff(&self, other: &BlockTransport) -> f64 {
        (&self.m - &other.m).amax()
    }

    pub fn scale_free_diff(&self, other: &BlockTransport) -> f64 {
        self.max_diff(other) / self.m.amax().max(1.0)
    }

    fn assemble(n: usize, d: usize, p_ad: &RMat, p_rho: &CMat, b12: &[RMat; 4]) -> Self {
        let mut m = RMat::zeros(4 * n + 2 * d, 4 * n + 2 * d);
        for beta in 0..4 {
            m.view_mut((beta * n, beta * n), (n, n)).copy_from(p_ad);
            m.view_mut((beta * n, 4 * n), (n, 2 * d)).copy_from(&b12[beta]);
        }
        m.view_mut((4 * n, 4 * n), (2 * d, 2 * d)).copy_from(&real_form(p_rho));
        BlockTransport { n, d, m }
    }
}

pub fn cvec_to_real(v: &CVec) -> nalgebra::DVector<f64> {
    let d = v.len();
    nalgebra::DVector::from_fn(2 * d, |i, _| if i < d { v[i].re } else { v[i - d].im })
}

pub fn real_to_cvec(r: &[f64]) -> CVec {
    let d = r.len() / 2;
    CVec::from_fn(d, |i, _| Complex64::new(r[i], r[d + i]))
}

/// [[Re M, −Im M], [Im M, Re M]].
pub fn real_form(m: &CMat) -> RMat {
    let d = m.nrows();
    RMat::from_fn(2 * d, 2 * d, |i, j| {
        let z = m[(i % d, j % d)];
        match (i < d, j < d) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Columns: 𝕁_ρ(e_j, φ) for the real basis e_j of 𝒲 (as in `cvec_to_real`).
fn pairing_matrix(rep: &Representation, phi: &[Complex64]) -> RMat {
    let d = rep.dim();
    let n = rep.group().dim();
    let mut k = RMat::zeros(n, 2 * d);
    let mut v = vec![Complex64::new(0.0, 0.0); d];
    for j in 0..2 * d {
        v.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        v[j % d] = if j < d { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 1.0) };
        let c = rep.j_coords(&v, phi);
        for i in 0..n {
            k[(i, j)] = c[i];
        }
    }
    k
}

/// Direct integration of the coupled system, column by column.
pub fn coupled_transport<A, P>(a: &A, phi: &P, rep: &Representation, ray: &LightRay, tol: f64) -> Result<BlockTransport>
where
    A: ConnectionField + ?Sized,
    P: HiggsField + ?Sized,
{
    check_group(a, rep)?;
    let (n, d) = (rep.group().dim(), rep.dim());
    let size = 4 * n + 2 * d;
    let vb = ray.lowered_velocity();
    let s = rep.structure();
    let f = |t: f64, y: &RMat| -> RMat {
        let p = ray.point(t);
        let av = a.contract(&p, &ray.velocity);
        let ph = phi.value(&p);
        let mut out = RMat::zeros(size, size);
        let mut ups = vec![Complex64::new(0.0, 0.0); d];
        let mut dups = vec![Complex64::new(0.0, 0.0); d];
        for col in 0..size {
            let c = y.column(col);
            for i in 0..d {
                ups[i] = Complex64::new(c[4 * n + i], c[4 * n + d + i]);
            }
            let j = rep.j_coords(&ups, ph.as_slice());
            for beta in 0..4 {
                let w: Vec<f64> = (0..n).map(|i| c[beta * n + i]).collect();
                let mut dw = vec![0.0; n];
                s.bracket_acc(&av, &w, -1.0, &mut dw);
                for i in 0..n {
                    out[(beta * n + i, col)] = dw[i] - 0.5 * vb[beta] * j[i];
                }
            }
            dups.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            rep.act_coords(&av, &ups, &mut dups);
            for i in 0..d {
                out[(4 * n + i, col)] = -dups[i].re;
                out[(4 * n + d + i, col)] = -dups[i].im;
            }
        }
        out
    };
    let (m, _) = rk4_adaptive(&f, &RMat::identity(size, size), ray.t1, ray.t2, tol, |_| 0.0)?;
    Ok(BlockTransport { n, d, m })
}

/// Ẏ = −𝔸(γ̇)Y for the ambient connection
/// 𝔸(u)(X_β, υ) = ([A(u), X_β] + ½ u_β 𝕁_ρ(υ, Φ), ρ_*(A(u))υ).
pub fn coupled_transport_via_ambient<A, P>(a: &A, phi: &P, rep: &Representation, ray: &LightRay, tol: f64) -> Result<BlockTransport>
where
    A: ConnectionField + ?Sized,
    P: HiggsField + ?Sized,
{
    check_group(a, rep)?;
    let (n, d) = (rep.group().dim(), rep.dim());
    let size = 4 * n + 2 * d;
    let vb = ray.lowered_velocity();
    let s = rep.structure();
    let ambient = |t: f64| -> RMat {
        let p = ray.point(t);
        let av = a.contract(&p, &ray.velocity);
        let ad = s.ad_matrix(&av);
        let k = pairing_matrix(rep, phi.value(&p).as_slice());
        let mut l = RMat::zeros(size, size);
        for beta in 0..4 {
            l.view_mut((beta * n, beta * n), (n, n)).copy_from(&ad);
            l.view_mut((beta * n, 4 * n), (n, 2 * d)).copy_from(&(&k * (0.5 * vb[beta])));
        }
        l.view_mut((4 * n, 4 * n), (2 * d, 2 * d)).copy_from(&real_form(&rep.rho_star_coords(&av)));
        l
    };
    let f = |t: f64, y: &RMat| -> RMat { -(ambient(t) * y) };
    let (m, _) = rk4_adaptive(&f, &RMat::identity(size, size), ray.t1, ray.t2, tol, |_| 0.0)?;
    Ok(BlockTransport { n, d, m })
}

/// Group transport on a grid plus Simpson quadrature of the Duhamel integral.
pub fn coupled_transport_duhamel<A, P>(a: &A, phi: &P, rep: &Representation, ray: &LightRay, tol: f64) -> Result<BlockTransport>
where
    A: ConnectionField + ?Sized,
    P: HiggsField + ?Sized,
{
    check_group(a, rep)?;
    let (n, d) = (rep.group().dim(), rep.dim());
    let adj = Representation::new(rep.group(), RepSpec::Adjoint)?;
    let vb = ray.lowered_velocity();
    let eval = |m: usize| -> Result<(RMat, CMat, RMat)> {
        let path = transport_group_path(a, ray, m);
        let h = (ray.t2 - ray.t1) / m as f64;
        let mut samples: Vec<RMat> = Vec::with_capacity(m + 1);
        for (k, u) in path.iter().enumerate() {
            let p = ray.point(ray.t1 + k as f64 * h);
            let pulled = rep.rho(&u.inverse())? * phi.value(&p);
            samples.push(pairing_matrix(rep, pulled.as_slice()));
        }
        let mut integral = RMat::zeros(n, 2 * d);
        for i in 0..n {
            for j in 0..2 * d {
                let vals: Vec<f64> = samples.iter().map(|s| s[(i, j)]).collect();
                integral[(i, j)] = simpson(&vals, h);
            }
        }
        let last = path.last().expect("non-empty path");
        let p_ad = adj.rho(last)?.map(|z| z.re);
        let p_rho = rep.rho(last)?;
        Ok((p_ad, p_rho, integral))
    };
    if ray.t1 == ray.t2 {
        let z = RMat::zeros(n, 2 * d);
        return Ok(BlockTransport::assemble(
            n,
            d,
            &RMat::identity(n, n),
            &CMat::identity(d, d),
            &[z.clone(), z.clone(), z.clone(), z],
        ));
    }
    let mut m = 32;
    let mut prev = eval(m)?;
    loop {
        m *= 2;
        let cur = eval(m)?;
        let err = (&cur.0 - &prev.0)
            .amax()
            .max((&cur.2 - &prev.2).amax())
            .max((&cur.1 - &prev.1).iter().map(|z| z.norm()).fold(0.0, f64::max));
        if err <= tol {
            let (p_ad, p_rho, integral) = cur;
            let core = &p_ad * &integral * (-0.5);
            let b12 = [0, 1, 2, 3].map(|beta| &core * vb[beta]);
            return Ok(BlockTransport::assemble(n, d, &p_ad, &p_rho, &b12));
        }
        if m > crate::ode::MAX_STEPS {
            return Err(LabError::NoConvergence { steps: m, defect: err });
        }
        prev = cur;
    }
}

/// 𝐒 = P_{z←y} P_{y←x} in the representation ρ.
pub fn broken_transform<A: ConnectionField + ?Sized>(
    a: &A,
    rep: &Representation,
    x: &SpacetimePoint,
    y: &SpacetimePoint,
    z: &SpacetimePoint,
    tol: f64,
) -> Result<CMat> {
    let first = transport_rep(a, rep, &LightRay::through(x, y)?, tol)?;
    let second = transport_rep(a, rep, &LightRay::through(y, z)?, tol)?;
    Ok(second * first)
}

/// Broken transform of the coupled transport.
pub fn broken_block_transform<A, P>(
    a: &A,
    phi: &P,
    rep: &Representation,
    x: &SpacetimePoint,
    y: &SpacetimePoint,
    z: &SpacetimePoint,
    tol: f64,
) -> Result<BlockTransport>
where
    A: ConnectionField + ?Sized,
    P: HiggsField + ?Sized,
{
    let first = coupled_transport(a, phi, rep, &LightRay::through(x, y)?, tol)?;
    let second = coupled_transport(a, phi, rep, &LightRay::through(y, z)?, tol)?;
    second.compose(&first)
}

/// Condition-number ceiling for the pairing solve in `reconstruct_higgs`.
pub const PAIRING_COND_MAX: f64 = 1e8;

/// The real-linear map w ↦ (𝕁_ρ(e_j, w))_j, ℝ^{2d} → ℝ^{n·2d}.
fn pairing_operator(rep: &Representation) -> RMat {
    let (n, d) = (rep.group().dim(), rep.dim());
    let mut k = RMat::zeros(n * 2 * d, 2 * d);
    for col in 0..2 * d {
        let mut e = CVec::zeros(d);
        e[col % d] = if col < d { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 1.0) };
        let block = pairing_matrix(rep, e.as_slice());
        for j in 0..2 * d {
            for i in 0..n {
                k[(j * n + i, col)] = block[(i, j)];
            }
        }
    }
    k
}

/// Recovers Φ at the starting points of a family of rays that share their
/// line and endpoint z and whose starting parameters are spaced by `h`.
///
/// The data are the coupled transports from y(t_y) to z. Dividing block12_0
/// by −½γ̇_0 P^Ad leaves 𝕁_ρ(·, 𝓘) with 𝓘 = ∫ ρ(U(s))⁻¹Φ(γ(s)) ds, U the
/// transport from y; 𝓘 is read off by least squares. With U₀ the transport
/// from z, ρ(U₀(t_y)) = (P^ρ)⁻¹ and 𝓘₀ = P^ρ 𝓘 = ∫ ρ(U₀(s))⁻¹Φ ds, so
/// Φ(y) = −ρ(U₀(t_y)) ∂_{t_y}𝓘₀. End samples use one-sided stencils.
pub fn reconstruct_higgs(rep: &Representation, rays: &[LightRay], data: &[BlockTransport], h: f64) -> Result<Vec<CVec>> {
    if rays.len() != data.len() || rays.len() < 3 {
        return Err(LabError::DegenerateGeometry("need at least three rays with matching data".into()));
    }
    if !(h > 0.0) {
        return Err(LabError::DegenerateGeometry(format!("step {h} must be positive")));
    }
    let first = &rays[0];
    for (k, r) in rays.iter().enumerate() {
        let same_line = r.base == first.base && r.velocity == first.velocity && r.t2 == first.t2;
        if !same_line || ((r.t1 - first.t1) - k as f64 * h).abs() > 1e-9 * (1.0 + h) {
            return Err(LabError::DegenerateGeometry("rays must share line and end, with starts spaced by h".into()));
        }
    }
    if !rep.is_fully_charged() {
        return Err(LabError::NotFullyCharged);
    }
    let k = pairing_operator(rep);
    let svd = k.clone().svd(true, true);
    let (smax, smin) = svd
        .singular_values
        .iter()
        .fold((0.0f64, f64::INFINITY), |(a, b), s| (a.max(*s), b.min(*s)));
    if smin <= 0.0 || smax / smin > PAIRING_COND_MAX {
        return Err(LabError::IllConditioned(format!("pairing condition number {:e}", smax / smin)));
    }
    let vb0 = first.lowered_velocity()[0];
    if vb0 == 0.0 {
        return Err(LabError::DegenerateGeometry("ray has no time component".into()));
    }
    let (n, d) = (rep.group().dim(), rep.dim());
    let mut pulled = Vec::with_capacity(data.len());
    let mut back = Vec::with_capacity(data.len());
    for bt in data {
        if bt.n != n || bt.d != d {
            return Err(LabError::ShapeMismatch);
        }
        let p_ad_inv = bt
            .p_ad()
            .try_inverse()
            .ok_or_else(|| LabError::IllConditioned("adjoint transport is singular".into()))?;
        let m = p_ad_inv * bt.block12(0) * (-2.0 / vb0);
        let rhs = nalgebra::DVector::from_fn(n * 2 * d, |r, _| m[(r % n, r / n)]);
        let w = svd.solve(&rhs, 0.0).map_err(|e| LabError::IllConditioned(e.to_string()))?;
        let p_rho = bt.p_rho();
        pulled.push(&p_rho * real_to_cvec(w.as_slice()));
        back.push(p_rho.adjoint());
    }
    let last = pulled.len() - 1;
    Ok((0..=last)
        .map(|i| {
            let stencil: [(usize, f64); 3] = match i {
                0 => [(0, -3.0), (1, 4.0), (2, -1.0)],
                _ if i == last => [(last, 3.0), (last - 1, -4.0), (last - 2, 1.0)],
                _ => [(i + 1, 1.0), (i - 1, -1.0), (i, 0.0)],
            };
            let mut deriv = CVec::zeros(d);
            for (j, c) in stencil {
                deriv += &pulled[j] * Complex64::from(c / (2.0 * h));
            }
            -(&back[i] * deriv)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::GroupSpec;
    use crate::fields::{ConstantConnection, ConstantHiggs, SmoothConnection, SmoothHiggs};

    #[test]
    fn rejects_timelike_direction() {
        assert!(matches!(
            LightRay::new([0.0; 4], [1.0, 0.5, 0.0, 0.0], 0.0, 1.0),
            Err(LabError::NotLightlike(_))
        ));
    }

    #[test]
    fn zero_connection_gives_identity() {
        let g = GroupSpec::electroweak();
        let a = ConstantConnection::zero(&g);
        let ray = LightRay::new([0.0; 4], [1.0, 0.0, 1.0, 0.0], -0.5, 0.5).unwrap();
        let u = transport_group(&a, &ray, 1e-13).unwrap();
        assert!(u.distance(&g.identity()) < 1e-15);
    }

    #[test]
    fn abelian_constant_phase() {
        // A = iα dt on U(1), ρ = e^{inθ}: transport factor exp(−i n α (t₂ − t₁) γ̇⁰).
        let g = GroupSpec::u1();
        let alpha = 0.7;
        let a = ConstantConnection { group: g.clone(), coords: [vec![alpha], vec![0.0], vec![0.0], vec![0.0]] };
        let rep = Representation::new(&g, RepSpec::Charge { n: 2 }).unwrap();
        let ray = LightRay::new([0.0; 4], [1.0, 1.0, 0.0, 0.0], 0.0, 0.8).unwrap();
        let m = transport_rep(&a, &rep, &ray, 1e-13).unwrap();
        let want = Complex64::new(0.0, -2.0 * alpha * 0.8).exp();
        assert!((m[(0, 0)] - want).norm() < 1e-12);
    }

    #[test]
    fn constant_higgs_block_closed_form() {
        // A = 0, Φ = φ₀: upper-right block = −½ γ̇_β (t₂ − t₁) 𝕁_ρ(υ, φ₀).
        let g = GroupSpec::u1();
        let rep = Representation::new(&g, RepSpec::Charge { n: 1 }).unwrap();
        let a = ConstantConnection::zero(&g);
        let phi0 = CVec::from_vec(vec![Complex64::new(0.4, -0.9)]);
        let phi = ConstantHiggs(phi0.clone());
        let ray = LightRay::new([0.0; 4], [1.0, 0.0, 0.0, 1.0], 0.1, 0.9).unwrap();
        let bt = coupled_transport(&a, &phi, &rep, &ray, 1e-13).unwrap();
        let ups = CVec::from_vec(vec![Complex64::new(1.1, 0.3)]);
        let vb = ray.lowered_velocity();
        for beta in 0..4 {
            let got = bt.apply_block12(beta, &ups);
            let j = rep.j_coords(ups.as_slice(), phi0.as_slice());
            let want = -0.5 * vb[beta] * 0.8 * j[0];
            assert!((got[0] - want).abs() < 1e-12, "β = {beta}");
        }
        assert!(bt.lower_left().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn three_routes_agree_nonabelian() {
        let g = GroupSpec::electroweak();
        let rep = Representation::new(&g, RepSpec::Electroweak { n_y: 3 }).unwrap();
        let a = SmoothConnection::random(&g, 11, 0.6, false);
        let phi = SmoothHiggs::random(2, 12, 0.8);
        let ray = LightRay::new([-0.2, 0.1, 0.0, 0.0], [1.0, 0.6, 0.8, 0.0], 0.0, 0.7).unwrap();
        let r1 = coupled_transport(&a, &phi, &rep, &ray, 1e-12).unwrap();
        let r2 = coupled_transport_via_ambient(&a, &phi, &rep, &ray, 1e-12).unwrap();
        let r3 = coupled_transport_duhamel(&a, &phi, &rep, &ray, 1e-12).unwrap();
        assert!(r1.scale_free_diff(&r2) < 1e-9);
        assert!(r1.scale_free_diff(&r3) < 1e-9, "{}", r1.scale_free_diff(&r3));
        assert!(r1.lower_left().iter().all(|v| *v == 0.0));
    }
}
