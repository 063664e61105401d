//! Gauge transformations, the temporal gauge, and the Lorenz and
//! compatibility residuals.
//!
//! (A, Φ)·U = (U⁻¹dU + U⁻¹AU, ρ(U⁻¹)Φ).

use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, CMat, CVec, GroupElement, GroupSpec, Representation};
use crate::calculus::{coords_norm, Lin, Ops, Stencil, ETA};
use crate::error::{LabError, Result};
use crate::fields::{ConnectionField, Coords4, HiggsField, Profile};
use crate::geometry::{in_diamond, spatial_norm, SpacetimePoint};
use crate::ode::rk4_adaptive;
use crate::transport::combine;

/// Step of the fourth-order stencil used when a gauge has no exact derivative.
pub const GAUGE_FD_STEP: f64 = 1e-3;

pub trait GaugeField: Send + Sync {
    fn group(&self) -> &GroupSpec;
    fn value(&self, p: &SpacetimePoint) -> GroupElement;

    /// U⁻¹∂_αU when known in closed form.
    fn maurer_cartan_exact(&self, _p: &SpacetimePoint, _alpha: usize) -> Option<Vec<f64>> {
        None
    }

    fn maurer_cartan(&self, p: &SpacetimePoint, alpha: usize) -> Vec<f64> {
        if let Some(c) = self.maurer_cartan_exact(p, alpha) {
            return c;
        }
        let h = GAUGE_FD_STEP;
        let at = |d: f64| {
            let mut q = *p;
            q[alpha] += d;
            self.value(&q)
        };
        let (p1, m1, p2, m2) = (at(h), at(-h), at(2.0 * h), at(-2.0 * h));
        let u = self.value(p);
        let blocks: Vec<CMat> = (0..u.blocks.len())
            .map(|b| {
                let du = (&p1.blocks[b] * Complex64::from(8.0) - &m1.blocks[b] * Complex64::from(8.0)
                    - &p2.blocks[b]
                    + &m2.blocks[b])
                    / Complex64::from(12.0 * h);
                u.blocks[b].adjoint() * du
            })
            .collect();
        self.group().coords(&AlgebraElement { blocks }).expect("gauge matches its group")
    }
}

impl<T: GaugeField + ?Sized> GaugeField for Arc<T> {
    fn group(&self) -> &GroupSpec {
        (**self).group()
    }
    fn value(&self, p: &SpacetimePoint) -> GroupElement {
        (**self).value(p)
    }
    fn maurer_cartan_exact(&self, p: &SpacetimePoint, alpha: usize) -> Option<Vec<f64>> {
        (**self).maurer_cartan_exact(p, alpha)
    }
}

/// U = exp(Σ_i θ_i(x) e_i).
#[derive(Clone, Debug)]
pub struct ExpGauge {
    pub group: GroupSpec,
    pub theta: Vec<Profile>,
    basis: Vec<AlgebraElement>,
}

impl ExpGauge {
    pub fn random(group: &GroupSpec, seed: u64, amplitude: f64) -> Self {
        let sc = crate::fields::SmoothConnection::random(group, seed, amplitude, false);
        ExpGauge {
            group: group.clone(),
            theta: sc.profiles[1].clone(),
            basis: group.basis(),
        }
    }
}

impl GaugeField for ExpGauge {
    fn group(&self) -> &GroupSpec {
        &self.group
    }
    fn value(&self, p: &SpacetimePoint) -> GroupElement {
        let c: Vec<f64> = self.theta.iter().map(|f| f.eval(p)).collect();
        self.group.exp(&combine(&self.basis, &c)).expect("same group")
    }
}

/// U = exp(f(x)X) for fixed X, so that U⁻¹∂U = (∂f)X exactly.
#[derive(Clone, Debug)]
pub struct ScalarExpGauge {
    pub group: GroupSpec,
    pub x: Vec<f64>,
    pub f: Profile,
}

impl ScalarExpGauge {
    fn df(&self, p: &SpacetimePoint, alpha: usize) -> f64 {
        let f = &self.f;
        let dot = f.k[0] * p[0] + f.k[1] * p[1] + f.k[2] * p[2] + f.k[3] * p[3];
        f.l[alpha] + f.b * f.k[alpha] * (dot + f.phase).cos() + 2.0 * f.q * p[alpha]
    }
}

impl GaugeField for ScalarExpGauge {
    fn group(&self) -> &GroupSpec {
        &self.group
    }
    fn value(&self, p: &SpacetimePoint) -> GroupElement {
        let c: Vec<f64> = self.x.iter().map(|v| v * self.f.eval(p)).collect();
        self.group.exp(&self.group.from_coords(&c).expect("same group")).expect("same group")
    }
    fn maurer_cartan_exact(&self, p: &SpacetimePoint, alpha: usize) -> Option<Vec<f64>> {
        let d = self.df(p, alpha);
        Some(self.x.iter().map(|v| v * d).collect())
    }
}

/// U(x)U(p₀)⁻¹, equal to the identity at p₀.
pub struct PointedGauge<G> {
    pub inner: G,
    pub base: SpacetimePoint,
    at_base_inv: GroupElement,
}

impl<G: GaugeField> PointedGauge<G> {
    pub fn new(inner: G, base: SpacetimePoint) -> Self {
        let at_base_inv = inner.value(&base).inverse();
        PointedGauge { inner, base, at_base_inv }
    }
}

impl<G: GaugeField> GaugeField for PointedGauge<G> {
    fn group(&self) -> &GroupSpec {
        self.inner.group()
    }
    fn value(&self, p: &SpacetimePoint) -> GroupElement {
        self.inner.value(p).mul(&self.at_base_inv).expect("same group")
    }
    fn maurer_cartan_exact(&self, p: &SpacetimePoint, alpha: usize) -> Option<Vec<f64>> {
        // (UC)⁻¹∂(UC) = Ad_{C⁻¹}(U⁻¹∂U)
        let mc = self.inner.maurer_cartan_exact(p, alpha)?;
        let g = self.group();
        let x = g.from_coords(&mc).ok()?;
        let y = self.at_base_inv.inverse().adjoint(&x).ok()?;
        g.coords(&y).ok()
    }
}

pub const BASEPOINT: SpacetimePoint = [-1.0, 0.0, 0.0, 0.0];

pub fn is_pointed<G: GaugeField + ?Sized>(u: &G, tol: f64) -> bool {
    u.value(&BASEPOINT).distance(&u.group().identity()) <= tol
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GaugeSpec {
    Identity,
    Random { seed: u64, amplitude: f64 },
}

pub struct IdentityGauge(pub GroupSpec);

impl GaugeField for IdentityGauge {
    fn group(&self) -> &GroupSpec {
        &self.0
    }
    fn value(&self, _p: &SpacetimePoint) -> GroupElement {
        self.0.identity()
    }
    fn maurer_cartan_exact(&self, _p: &SpacetimePoint, _alpha: usize) -> Option<Vec<f64>> {
        Some(vec![0.0; self.0.dim()])
    }
}

impl GaugeSpec {
    pub fn build(&self, group: &GroupSpec) -> Arc<dyn GaugeField> {
        match self {
            GaugeSpec::Identity => Arc::new(IdentityGauge(group.clone())),
            GaugeSpec::Random { seed, amplitude } => {
                Arc::new(PointedGauge::new(ExpGauge::random(group, *seed, *amplitude), BASEPOINT))
            }
        }
    }

    pub fn random_scalar(group: &GroupSpec, seed: u64, amplitude: f64) -> ScalarExpGauge {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = group.random_algebra(&mut rng, 1.0);
        let sc = crate::fields::SmoothConnection::random(group, seed ^ 0x5eed, amplitude, false);
        ScalarExpGauge {
            group: group.clone(),
            x: group.coords(&x).expect("same group"),
            f: sc.profiles[2][0].clone(),
        }
    }
}

/// A·U.
pub struct GaugedConnection<A, G> {
    pub a: A,
    pub u: G,
}

impl<A: ConnectionField, G: GaugeField> ConnectionField for GaugedConnection<A, G> {
    fn group(&self) -> &GroupSpec {
        self.a.group()
    }
    fn coords(&self, p: &SpacetimePoint) -> Coords4 {
        let g = self.a.group();
        let uinv = self.u.value(p).inverse();
        let c = self.a.components(p);
        [0, 1, 2, 3].map(|al| {
            let mut out = g.coords(&uinv.adjoint(&c[al]).expect("same group")).expect("same group");
            out.axpy(1.0, &self.u.maurer_cartan(p, al));
            out
        })
    }
}

/// ρ(U⁻¹)Φ.
pub struct GaugedHiggs<P, G> {
    pub phi: P,
    pub u: G,
    pub rep: Representation,
}

impl<P: HiggsField, G: GaugeField> HiggsField for GaugedHiggs<P, G> {
    fn dim(&self) -> usize {
        self.phi.dim()
    }
    fn value(&self, p: &SpacetimePoint) -> CVec {
        self.rep.rho(&self.u.value(p).inverse()).expect("same group") * self.phi.value(p)
    }
}

pub fn apply_gauge<A, P, G>(a: A, phi: P, rep: &Representation, u: G) -> (GaugedConnection<A, G>, GaugedHiggs<P, G>)
where
    A: ConnectionField,
    P: HiggsField,
    G: GaugeField + Clone,
{
    (
        GaugedConnection { a, u: u.clone() },
        GaugedHiggs { phi, u, rep: rep.clone() },
    )
}

/// Temporal gauge: ∂_tU = −V₀U with U = Id on t = |x| − 1.
pub struct TemporalGauge<V> {
    pub v: V,
    pub tol: f64,
}

impl<V: ConnectionField> TemporalGauge<V> {
    fn integrate(&self, p: &SpacetimePoint) -> Result<GroupElement> {
        let g = self.v.group();
        let basis = g.basis();
        let f = |t: f64, u: &Vec<CMat>| -> Vec<CMat> {
            let q = [t, p[1], p[2], p[3]];
            let x = combine(&basis, &self.v.coords(&q)[0]);
            x.blocks.iter().zip(u).map(|(xb, ub)| -(xb * ub)).collect()
        };
        let t0 = spatial_norm(p) - 1.0;
        let (u, _) = rk4_adaptive(&f, &g.identity().blocks, t0, p[0], self.tol, |_| 0.0)?;
        Ok(GroupElement { blocks: u })
    }

    pub fn try_value(&self, p: &SpacetimePoint) -> Result<GroupElement> {
        if !in_diamond(p) {
            return Err(LabError::OutsideDomain(format!("{p:?} is outside the diamond")));
        }
        self.integrate(p)
    }
}

impl<V: ConnectionField> GaugeField for TemporalGauge<V> {
    fn group(&self) -> &GroupSpec {
        self.v.group()
    }
    fn value(&self, p: &SpacetimePoint) -> GroupElement {
        // stencil neighbours may sit just outside the diamond; the ODE is
        // integrated the same way there
        self.integrate(p).expect("temporal gauge ODE converges")
    }
    fn maurer_cartan_exact(&self, p: &SpacetimePoint, alpha: usize) -> Option<Vec<f64>> {
        if alpha != 0 {
            return None;
        }
        // U⁻¹∂_tU = −U⁻¹V₀U
        let g = self.v.group();
        let v0 = g.from_coords(&self.v.coords(p)[0]).ok()?;
        let u = self.value(p);
        let c = g.coords(&u.inverse().adjoint(&v0).ok()?).ok()?;
        Some(c.into_iter().map(|x| -x).collect())
    }
}

pub struct TemporalGaugeResult<V: ConnectionField + Clone, P: HiggsField> {
    pub gauge: Arc<TemporalGauge<V>>,
    pub connection: GaugedConnection<V, Arc<TemporalGauge<V>>>,
    pub higgs: GaugedHiggs<P, Arc<TemporalGauge<V>>>,
    /// max over the sample points of ‖(𝒯V)₀‖.
    pub time_component: f64,
}

pub fn temporal_gauge<V, P>(v: V, psi: P, rep: &Representation, tol: f64, samples: &[SpacetimePoint]) -> Result<TemporalGaugeResult<V, P>>
where
    V: ConnectionField + Clone,
    P: HiggsField,
{
    let gauge = Arc::new(TemporalGauge { v: v.clone(), tol });
    for p in samples {
        gauge.try_value(p)?;
    }
    let connection = GaugedConnection { a: v, u: gauge.clone() };
    let higgs = GaugedHiggs { phi: psi, u: gauge.clone(), rep: rep.clone() };
    let mut time_component: f64 = 0.0;
    for p in samples {
        let c = connection.coords(p);
        time_component = time_component.max(coords_norm(&c[0]));
    }
    Ok(TemporalGaugeResult { gauge, connection, higgs, time_component })
}

/// Largest |(A)₀| over sample points.
pub fn temporal_defect<A: ConnectionField + ?Sized>(a: &A, samples: &[SpacetimePoint]) -> f64 {
    samples.iter().map(|p| coords_norm(&a.coords(p)[0])).fold(0.0, f64::max)
}

/// ‖D_A^*W‖ at each sample point.
pub fn lorenz_residual<A, W>(a: &A, w: &W, rep: &Representation, samples: &[SpacetimePoint], steps: [f64; 4], stencil: Stencil) -> Vec<f64>
where
    A: ConnectionField + ?Sized,
    W: ConnectionField + ?Sized,
{
    let ops = Ops::new(rep, steps, stencil);
    let wf = |q: &SpacetimePoint| w.coords(q);
    samples.iter().map(|p| coords_norm(&ops.d_star_one(a, &wf, p))).collect()
}

/// ‖D_V^*J − 𝕁_ρ(𝓕, Ψ)‖ at each sample point.
#[allow(clippy::too_many_arguments)]
pub fn compatibility_residual<V, P, J, F>(
    v: &V,
    psi: &P,
    j: &J,
    f: &F,
    rep: &Representation,
    samples: &[SpacetimePoint],
    steps: [f64; 4],
    stencil: Stencil,
) -> Vec<f64>
where
    V: ConnectionField + ?Sized,
    P: HiggsField + ?Sized,
    J: ConnectionField + ?Sized,
    F: HiggsField + ?Sized,
{
    let ops = Ops::new(rep, steps, stencil);
    let jf = |q: &SpacetimePoint| j.coords(q);
    samples
        .iter()
        .map(|p| {
            let mut r = ops.d_star_one(v, &jf, p);
            let src = rep.j_coords(f.value(p).as_slice(), psi.value(p).as_slice());
            r.axpy(-1.0, &src);
            coords_norm(&r)
        })
        .collect()
}

/// Manufactured sources (J, 𝓕) of a closed-form pair (V, Ψ):
/// J = D_V^*F_V + 𝕁_ρ(d_VΨ, Ψ), 𝓕 = d_V^*d_VΨ + 𝒱'(|Ψ|²)Ψ.
pub struct ManufacturedSources<'a, V: ?Sized, P: ?Sized> {
    pub v: &'a V,
    pub psi: &'a P,
    pub rep: &'a Representation,
    pub h: f64,
}

impl<'a, V: ConnectionField + ?Sized, P: HiggsField + ?Sized> ManufacturedSources<'a, V, P> {
    fn ops(&self) -> Ops<'_> {
        Ops::new(self.rep, [self.h; 4], Stencil::Central4)
    }
}

impl<'a, V: ConnectionField + ?Sized, P: HiggsField + ?Sized> ConnectionField for ManufacturedSources<'a, V, P> {
    fn group(&self) -> &GroupSpec {
        self.v.group()
    }
    fn coords(&self, p: &SpacetimePoint) -> Coords4 {
        self.ops().ymh(self.v, self.psi, p).0
    }
}

impl<'a, V: ConnectionField + ?Sized, P: HiggsField + ?Sized> HiggsField for ManufacturedSources<'a, V, P> {
    fn dim(&self) -> usize {
        self.rep.dim()
    }
    fn value(&self, p: &SpacetimePoint) -> CVec {
        self.ops().ymh(self.v, self.psi, p).1
    }
}

/// Gauge covariance of the YMH operator at one point: returns
/// (‖E₁((A,Φ)·U) − Ad_{U⁻¹}E₁(A,Φ)‖, ‖E₂((A,Φ)·U) − ρ(U⁻¹)E₂(A,Φ)‖).
pub fn ymh_covariance_defect<A, P, G>(a: &A, phi: &P, u: &G, rep: &Representation, p: &SpacetimePoint, h: f64) -> (f64, f64)
where
    A: ConnectionField + Clone,
    P: HiggsField + Clone,
    G: GaugeField + Clone,
{
    let ops = Ops::new(rep, [h; 4], Stencil::Central4);
    let (e1, e2) = ops.ymh(a, phi, p);
    let (ag, pg) = apply_gauge(a.clone(), phi.clone(), rep, u.clone());
    let (f1, f2) = ops.ymh(&ag, &pg, p);
    let g = rep.group();
    let uinv = u.value(p).inverse();
    let mut d1 = 0.0;
    for al in 0..4 {
        let x = g.from_coords(&e1[al]).expect("same group");
        let mut c = g.coords(&uinv.adjoint(&x).expect("same group")).expect("same group");
        c.axpy(-1.0, &f1[al]);
        d1 += c.iter().map(|v| v * v).sum::<f64>();
    }
    let rot = rep.rho(&uinv).expect("same group") * e2;
    (d1.sqrt(), (rot - f2).norm())
}

/// ⋆d⋆ of a U(1)-valued 1-form through explicit Hodge stars, for checking
/// the sign convention of the component formula.
pub fn codifferential_via_hodge<W: Fn(&SpacetimePoint) -> [f64; 4]>(w: &W, p: &SpacetimePoint, h: f64) -> f64 {
    use crate::geometry::{multi_indices, Form};
    let star3 = |q: &SpacetimePoint| Form { degree: 1, coeffs: w(q).to_vec() }.hodge_star();
    let idx3 = multi_indices(3);
    // d of a 3-form: (dβ)_{0123} = Σ_α (−1)^{pos} ∂_α β_{complement of α}
    let mut top = 0.0;
    for al in 0..4 {
        let comp: Vec<usize> = (0..4).filter(|j| *j != al).collect();
        let k = idx3.iter().position(|i| *i == comp).expect("index");
        let f = |q: &SpacetimePoint| vec![star3(q).coeffs[k]];
        let d = crate::calculus::partial(&f, p, al, h, Stencil::Central4)[0];
        let sign = if al % 2 == 0 { 1.0 } else { -1.0 };
        top += sign * d;
    }
    Form { degree: 4, coeffs: vec![top] }.hodge_star().coeffs[0]
}

/// −∂^αW_α for a scalar-valued 1-form.
pub fn codifferential_components<W: Fn(&SpacetimePoint) -> [f64; 4]>(w: &W, p: &SpacetimePoint, h: f64) -> f64 {
    (0..4)
        .map(|al| {
            let f = |q: &SpacetimePoint| vec![w(q)[al]];
            -ETA[al] * crate::calculus::partial(&f, p, al, h, Stencil::Central4)[0]
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::RepSpec;
    use crate::fields::{ConstantConnection, SmoothConnection, SmoothHiggs};
    use crate::transport::{transport_rep, LightRay};

    #[test]
    fn abelian_temporal_gauge_closed_form() {
        let g = GroupSpec::u1();
        let alpha = 0.8;
        let v = ConstantConnection { group: g.clone(), coords: [vec![alpha], vec![0.0], vec![0.0], vec![0.0]] };
        let tg = TemporalGauge { v, tol: 1e-13 };
        let p = [0.1, 0.3, 0.2, 0.0];
        let u = tg.try_value(&p).unwrap();
        let psi = spatial_norm(&p) - 1.0;
        let want = Complex64::new(0.0, -alpha * (p[0] - psi)).exp();
        assert!((u.blocks[0][(0, 0)] - want).norm() < 1e-12);
        assert!(tg.try_value(&[0.9, 0.5, 0.0, 0.0]).is_err());
    }

    #[test]
    fn transports_are_gauge_covariant() {
        let g = GroupSpec::electroweak();
        let rep = Representation::new(&g, RepSpec::Electroweak { n_y: 3 }).unwrap();
        let a = SmoothConnection::random(&g, 5, 0.5, false);
        let u = Arc::new(PointedGauge::new(ExpGauge::random(&g, 9, 0.7), BASEPOINT));
        let ag = GaugedConnection { a: a.clone(), u: u.clone() };
        let x = [-0.3, 0.1, 0.0, 0.0];
        let y = [0.1, 0.1, 0.4, 0.0];
        let ray = LightRay::through(&x, &y).unwrap();
        let p0 = transport_rep(&a, &rep, &ray, 1e-12).unwrap();
        let p1 = transport_rep(&ag, &rep, &ray, 1e-12).unwrap();
        let want = rep.rho(&u.value(&y).inverse()).unwrap() * p0 * rep.rho(&u.value(&x)).unwrap();
        assert!((p1 - want).norm() < 1e-7);
        assert!(is_pointed(&u, 1e-14));
    }

    #[test]
    fn hodge_route_matches_component_codifferential() {
        let w = |p: &SpacetimePoint| [p[0] * p[1], (p[2] + p[0]).sin(), p[3] * p[3] * p[0], p[1].cos()];
        let p = [0.2, -0.1, 0.4, 0.3];
        let a = codifferential_via_hodge(&w, &p, 1e-3);
        let b = codifferential_components(&w, &p, 1e-3);
        // with this star, ⋆d⋆W = −∂^αW_α on 1-forms
        assert!((a - b).abs() < 1e-9, "{a} {b}");
    }

    #[test]
    fn ymh_operator_is_covariant() {
        let g = GroupSpec::electroweak();
        let rep = Representation::new(&g, RepSpec::Electroweak { n_y: 1 }).unwrap();
        let a = SmoothConnection::random(&g, 21, 0.4, false);
        let phi = SmoothHiggs::random(2, 22, 0.5);
        let u = GaugeSpec::random_scalar(&g, 23, 0.6);
        let (d1, d2) = ymh_covariance_defect(&a, &phi, &u, &rep, &[0.0, 0.1, -0.1, 0.05], 1e-2);
        assert!(d1 < 1e-6 && d2 < 1e-6, "{d1} {d2}");
    }
}
