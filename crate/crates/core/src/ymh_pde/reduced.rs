//! Residuals of the temporal-gauge reduction for manufactured solutions: the
//! constraint ∂_0(∂^aA_a) + Ñ_0 = J_0 and the time-differentiated equations
//!
//!   □∂_tA_j + N_j = ∂_tJ_j − ∂_jJ_0,   N_j = −∂_jÑ_0 + ∂_0Ñ_j,
//!   □∂_tΦ + N = ∂_t𝓕.
//!
//! Every derivative of (A, Φ) and of the sources is a central difference
//! with step Δx, so for a correct reduction the residuals are O(Δx²).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::Representation;
use crate::calculus::{coords_norm, norm_sq, potential_prime, Lin, Ops, Stencil};
use crate::fields::{ConnectionField, HiggsField};
use crate::geometry::SpacetimePoint;

type C = Complex64;

/// Step of the manufactured sources (J, 𝓕), fourth order.
pub const SOURCE_FD_STEP: f64 = 1e-3;

/// Zeroth/first-order Higgs part whose time derivative is N.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HiggsLowerOrder {
    /// −2ρ_*(A_a)∂^aΦ − (∂^aρ_*(A_a))Φ − ρ_*(A_a)ρ_*(A^a)Φ + 𝒱'(|Φ|²)Φ, the
    /// expansion of d_A^*d_AΦ + 𝒱'Φ − □Φ with A_0 = 0.
    Expanded,
    /// The display with + signs on the last two connection terms.
    Printed,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReducedResiduals {
    pub constraint: f64,
    pub connection: f64,
    pub higgs: f64,
}

fn c4(p: &SpacetimePoint, axis: usize, d: f64) -> SpacetimePoint {
    let mut q = *p;
    q[axis] += d;
    q
}

/// Maximum residual norms over the sample points. A must satisfy A_0 = 0.
pub fn reduced_residuals<A, P>(a: &A, phi: &P, rep: &Representation, samples: &[SpacetimePoint], dx: f64, form: HiggsLowerOrder) -> ReducedResiduals
where
    A: ConnectionField + ?Sized,
    P: HiggsField + ?Sized,
{
    let s = rep.structure();
    let n = s.dim();
    let h = dx;
    let d1 = |f: &dyn Fn(&SpacetimePoint) -> Vec<f64>, p: &SpacetimePoint, ax: usize| -> Vec<f64> {
        let (u, v) = (f(&c4(p, ax, h)), f(&c4(p, ax, -h)));
        u.iter().zip(&v).map(|(x, y)| (x - y) / (2.0 * h)).collect()
    };
    let d1c = |f: &dyn Fn(&SpacetimePoint) -> Vec<C>, p: &SpacetimePoint, ax: usize| -> Vec<C> {
        let (u, v) = (f(&c4(p, ax, h)), f(&c4(p, ax, -h)));
        u.iter().zip(&v).map(|(x, y)| (x - y) / (2.0 * h)).collect()
    };
    let comp = |al: usize| move |q: &SpacetimePoint| a.coords(q)[al].clone();
    let phv = |q: &SpacetimePoint| -> Vec<C> { phi.value(q).iter().cloned().collect() };

    let div = |q: &SpacetimePoint| {
        let mut out = vec![0.0; n];
        for ax in 1..4 {
            out.axpy(1.0, &d1(&comp(ax), q, ax));
        }
        out
    };
    let n0 = |q: &SpacetimePoint| {
        let av = a.coords(q);
        let mut out = vec![0.0; n];
        for ax in 1..4 {
            s.bracket_acc(&av[ax], &d1(&comp(ax), q, 0), 1.0, &mut out);
        }
        rep.j_acc(&d1c(&phv, q, 0), &phv(q), 1.0, &mut out);
        out
    };
    let nj = |j: usize| {
        move |q: &SpacetimePoint| {
            let av = a.coords(q);
            let dv = div(q);
            let mut out = vec![0.0; n];
            s.bracket_acc(&dv, &av[j], -1.0, &mut out);
            for ax in 1..4 {
                s.bracket_acc(&av[ax], &d1(&comp(j), q, ax), -2.0, &mut out);
                s.bracket_acc(&av[ax], &d1(&comp(ax), q, j), 1.0, &mut out);
                let inner = s.bracket(&av[ax], &av[j]);
                s.bracket_acc(&av[ax], &inner, -1.0, &mut out);
            }
            let pv = phv(q);
            let mut cov = d1c(&phv, q, j);
            rep.act_coords(&av[j], &pv, &mut cov);
            rep.j_acc(&cov, &pv, 1.0, &mut out);
            out
        }
    };
    let act = |x: &[f64], v: &[C]| {
        let mut o = vec![C::new(0.0, 0.0); v.len()];
        rep.act_coords(x, v, &mut o);
        o
    };
    let lower = |q: &SpacetimePoint| -> Vec<C> {
        let av = a.coords(q);
        let pv = phv(q);
        let sign = match form {
            HiggsLowerOrder::Expanded => -1.0,
            HiggsLowerOrder::Printed => 1.0,
        };
        let mut out: Vec<C> = pv.iter().map(|v| v * potential_prime(norm_sq(&pv))).collect();
        for ax in 1..4 {
            let t1 = act(&av[ax], &d1c(&phv, q, ax));
            let t2 = act(&d1(&comp(ax), q, ax), &pv);
            let t3 = act(&av[ax], &act(&av[ax], &pv));
            for r in 0..pv.len() {
                out[r] += -2.0 * t1[r] + sign * (t2[r] + t3[r]);
            }
        }
        out
    };
    let ops = Ops::new(rep, [SOURCE_FD_STEP; 4], Stencil::Central4);
    let src = |q: &SpacetimePoint| ops.ymh(a, phi, q);
    // □f = ∂_t²f − Δf with step h
    let wave = |f: &dyn Fn(&SpacetimePoint) -> Vec<f64>, p: &SpacetimePoint| -> Vec<f64> {
        let c = f(p);
        let mut out = vec![0.0; c.len()];
        for ax in 0..4 {
            let sg = if ax == 0 { 1.0 } else { -1.0 };
            let (u, v) = (f(&c4(p, ax, h)), f(&c4(p, ax, -h)));
            for i in 0..c.len() {
                out[i] += sg * (u[i] - 2.0 * c[i] + v[i]) / (h * h);
            }
        }
        out
    };
    let wave_c = |f: &dyn Fn(&SpacetimePoint) -> Vec<C>, p: &SpacetimePoint| -> Vec<C> {
        let c = f(p);
        let mut out = vec![C::new(0.0, 0.0); c.len()];
        for ax in 0..4 {
            let sg = if ax == 0 { 1.0 } else { -1.0 };
            let (u, v) = (f(&c4(p, ax, h)), f(&c4(p, ax, -h)));
            for i in 0..c.len() {
                out[i] += (u[i] - 2.0 * c[i] + v[i]) * (sg / (h * h));
            }
        }
        out
    };

    let mut res = ReducedResiduals { constraint: 0.0, connection: 0.0, higgs: 0.0 };
    for p in samples {
        let j0 = src(p).0[0].clone();
        let mut c = d1(&div, p, 0);
        c.axpy(1.0, &n0(p));
        c.axpy(-1.0, &j0);
        res.constraint = res.constraint.max(coords_norm(&c));

        for j in 1..4 {
            let dta = |q: &SpacetimePoint| d1(&comp(j), q, 0);
            let mut r = wave(&dta, p);
            r.axpy(-1.0, &d1(&n0, p, j));
            r.axpy(1.0, &d1(&nj(j), p, 0));
            r.axpy(-1.0, &d1(&|q: &SpacetimePoint| src(q).0[j].clone(), p, 0));
            r.axpy(1.0, &d1(&|q: &SpacetimePoint| src(q).0[0].clone(), p, j));
            res.connection = res.connection.max(coords_norm(&r));
        }

        let dtp = |q: &SpacetimePoint| d1c(&phv, q, 0);
        let mut r = wave_c(&dtp, p);
        let dl = d1c(&lower, p, 0);
        let df = d1c(&|q: &SpacetimePoint| src(q).1.iter().cloned().collect(), p, 0);
        for i in 0..r.len() {
            r[i] += dl[i] - df[i];
        }
        res.higgs = res.higgs.max(norm_sq(&r).sqrt());
    }
    res
}
