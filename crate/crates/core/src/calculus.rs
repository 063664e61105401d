//! Finite-difference covariant calculus on closed-form or node-sampled fields.
//!
//! Sign conventions: D_A^*W = −∂^αW_α − [A^α, W_α] on 1-forms,
//! (D_A^*G)_β = −∂^αG_{αβ} − [A^α, G_{αβ}] on 2-forms, and likewise
//! d_A^*ω = −∂^αω_α − ρ_*(A^α)ω_α on 𝒲-valued 1-forms; these are the formal
//! adjoints for the Minkowski L² pairing.

use num_complex::Complex64;

use crate::algebra::{CVec, Representation};
use crate::fields::{ConnectionField, Coords4, HiggsField};
use crate::geometry::SpacetimePoint;

pub type TwoForm = [[Vec<f64>; 4]; 4];

/// η^{αα}.
pub const ETA: [f64; 4] = [-1.0, 1.0, 1.0, 1.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stencil {
    Central2,
    Central4,
}

pub trait Lin: Clone {
    fn axpy(&mut self, a: f64, x: &Self);
    fn scale(&mut self, a: f64);
}

impl Lin for Vec<f64> {
    fn axpy(&mut self, a: f64, x: &Self) {
        for (s, v) in self.iter_mut().zip(x) {
            *s += a * v;
        }
    }
    fn scale(&mut self, a: f64) {
        self.iter_mut().for_each(|v| *v *= a);
    }
}

impl Lin for CVec {
    fn axpy(&mut self, a: f64, x: &Self) {
        *self += x * Complex64::from(a);
    }
    fn scale(&mut self, a: f64) {
        *self *= Complex64::from(a);
    }
}

impl<T: Lin> Lin for [T; 4] {
    fn axpy(&mut self, a: f64, x: &Self) {
        for (s, v) in self.iter_mut().zip(x) {
            s.axpy(a, v);
        }
    }
    fn scale(&mut self, a: f64) {
        self.iter_mut().for_each(|v| v.scale(a));
    }
}

pub fn partial<T: Lin, F: Fn(&SpacetimePoint) -> T>(f: &F, p: &SpacetimePoint, axis: usize, h: f64, st: Stencil) -> T {
    let at = |d: f64| {
        let mut q = *p;
        q[axis] += d;
        f(&q)
    };
    match st {
        Stencil::Central2 => {
            let mut out = at(h);
            out.axpy(-1.0, &at(-h));
            out.scale(1.0 / (2.0 * h));
            out
        }
        Stencil::Central4 => {
            let mut out = at(h);
            out.scale(8.0);
            out.axpy(-8.0, &at(-h));
            out.axpy(-1.0, &at(2.0 * h));
            out.axpy(1.0, &at(-2.0 * h));
            out.scale(1.0 / (12.0 * h));
            out
        }
    }
}

pub fn potential(s: f64) -> f64 {
    0.5 * s * s - s
}

pub fn potential_prime(s: f64) -> f64 {
    s - 1.0
}

pub fn norm_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn re_inner(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum()
}

pub fn coords_norm(c: &[f64]) -> f64 {
    c.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Pointwise norm of a 1-form with the Euclidean sum over components.
pub fn one_form_norm(c: &Coords4) -> f64 {
    c.iter().map(|x| x.iter().map(|v| v * v).sum::<f64>()).sum::<f64>().sqrt()
}

pub fn higgs_one_form_norm(c: &[CVec; 4]) -> f64 {
    c.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt()
}

/// Differential operators with a fixed stencil and per-axis steps.
pub struct Ops<'a> {
    pub rep: &'a Representation,
    pub steps: [f64; 4],
    pub stencil: Stencil,
}

impl<'a> Ops<'a> {
    pub fn new(rep: &'a Representation, steps: [f64; 4], stencil: Stencil) -> Self {
        Ops { rep, steps, stencil }
    }

    fn d<T: Lin, F: Fn(&SpacetimePoint) -> T>(&self, f: &F, p: &SpacetimePoint, axis: usize) -> T {
        partial(f, p, axis, self.steps[axis], self.stencil)
    }

    pub fn curvature<A: ConnectionField + ?Sized>(&self, a: &A, p: &SpacetimePoint) -> TwoForm {
        let s = self.rep.structure();
        let n = s.dim();
        let c = a.coords(p);
        let f = |q: &SpacetimePoint| a.coords(q);
        let da: [Coords4; 4] = [0, 1, 2, 3].map(|al| self.d(&f, p, al));
        let mut out: TwoForm = Default::default();
        for al in 0..4 {
            for be in 0..4 {
                let mut v = vec![0.0; n];
                if al != be {
                    for i in 0..n {
                        v[i] = da[al][be][i] - da[be][al][i];
                    }
                    s.bracket_acc(&c[al], &c[be], 1.0, &mut v);
                }
                out[al][be] = v;
            }
        }
        out
    }

    /// D_A^*W for a 𝔤-valued 1-form W.
    pub fn d_star_one<A, W>(&self, a: &A, w: &W, p: &SpacetimePoint) -> Vec<f64>
    where
        A: ConnectionField + ?Sized,
        W: Fn(&SpacetimePoint) -> Coords4,
    {
        let s = self.rep.structure();
        let c = a.coords(p);
        let wv = w(p);
        let mut out = vec![0.0; s.dim()];
        for al in 0..4 {
            let dw = self.d(&|q: &SpacetimePoint| w(q)[al].clone(), p, al);
            out.axpy(-ETA[al], &dw);
            s.bracket_acc(&c[al], &wv[al], -ETA[al], &mut out);
        }
        out
    }

    /// D_A^*G for a 𝔤-valued 2-form G.
    pub fn d_star_two<A, G>(&self, a: &A, g: &G, p: &SpacetimePoint) -> Coords4
    where
        A: ConnectionField + ?Sized,
        G: Fn(&SpacetimePoint) -> TwoForm,
    {
        let s = self.rep.structure();
        let n = s.dim();
        let c = a.coords(p);
        let gv = g(p);
        let mut out: Coords4 = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for al in 0..4 {
            let dg = self.d(&|q: &SpacetimePoint| g(q)[al].clone(), p, al);
            for be in 0..4 {
                out[be].axpy(-ETA[al], &dg[be]);
                s.bracket_acc(&c[al], &gv[al][be], -ETA[al], &mut out[be]);
            }
        }
        out
    }

    /// d_AΦ.
    pub fn higgs_d<A, P>(&self, a: &A, phi: &P, p: &SpacetimePoint) -> [CVec; 4]
    where
        A: ConnectionField + ?Sized,
        P: Fn(&SpacetimePoint) -> CVec,
    {
        let c = a.coords(p);
        let v = phi(p);
        [0, 1, 2, 3].map(|al| {
            let mut out = self.d(phi, p, al);
            let mut acc = vec![Complex64::new(0.0, 0.0); v.len()];
            self.rep.act_coords(&c[al], v.as_slice(), &mut acc);
            for (o, x) in out.iter_mut().zip(acc) {
                *o += x;
            }
            out
        })
    }

    /// d_A^*ω.
    pub fn higgs_d_star<A, O>(&self, a: &A, om: &O, p: &SpacetimePoint) -> CVec
    where
        A: ConnectionField + ?Sized,
        O: Fn(&SpacetimePoint) -> [CVec; 4],
    {
        let c = a.coords(p);
        let ov = om(p);
        let mut out = CVec::zeros(self.rep.dim());
        for al in 0..4 {
            let dv = self.d(&|q: &SpacetimePoint| om(q)[al].clone(), p, al);
            Lin::axpy(&mut out, -ETA[al], &dv);
            let mut acc = vec![Complex64::new(0.0, 0.0); self.rep.dim()];
            self.rep.act_coords(&c[al], ov[al].as_slice(), &mut acc);
            for (o, x) in out.iter_mut().zip(acc) {
                *o -= x * ETA[al];
            }
        }
        out
    }

    /// 𝕁_ρ(ω, Φ) componentwise for a 𝒲-valued 1-form ω.
    pub fn j_one(&self, om: &[CVec; 4], phi: &CVec) -> Coords4 {
        [0, 1, 2, 3].map(|al| self.rep.j_coords(om[al].as_slice(), phi.as_slice()))
    }

    /// Yang–Mills–Higgs operator:
    /// (D_A^*F_A + 𝕁_ρ(d_AΦ, Φ), d_A^*d_AΦ + 𝒱'(|Φ|²)Φ).
    pub fn ymh<A, P>(&self, a: &A, phi: &P, p: &SpacetimePoint) -> (Coords4, CVec)
    where
        A: ConnectionField + ?Sized,
        P: HiggsField + ?Sized,
    {
        let ph = |q: &SpacetimePoint| phi.value(q);
        let f = |q: &SpacetimePoint| self.curvature(a, q);
        let mut e1 = self.d_star_two(a, &f, p);
        let v = phi.value(p);
        let dphi = self.higgs_d(a, &ph, p);
        let j = self.j_one(&dphi, &v);
        e1.axpy(1.0, &j);
        let dd = |q: &SpacetimePoint| self.higgs_d(a, &ph, q);
        let mut e2 = self.higgs_d_star(a, &dd, p);
        Lin::axpy(&mut e2, potential_prime(norm_sq(v.as_slice())), &v);
        (e1, e2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{GroupSpec, RepSpec};
    use crate::fields::{ConstantConnection, FnConnection, FnHiggs};

    #[test]
    fn lorenz_divergence_sign() {
        // W = f(t) dt on U(1): D^*W = −∂^0 W_0 = ∂_t f.
        let g = GroupSpec::u1();
        let rep = Representation::new(&g, RepSpec::Charge { n: 1 }).unwrap();
        let ops = Ops::new(&rep, [1e-3; 4], Stencil::Central4);
        let a = ConstantConnection::zero(&g);
        let w = |p: &SpacetimePoint| -> Coords4 { [vec![p[0] * p[0]], vec![0.0], vec![0.0], vec![0.0]] };
        let r = ops.d_star_one(&a, &w, &[0.3, 0.0, 0.0, 0.0]);
        assert!((r[0] - 0.6).abs() < 1e-9);
    }

    #[test]
    fn vacuum_solves_ymh() {
        let g = GroupSpec::electroweak();
        let rep = Representation::new(&g, RepSpec::Electroweak { n_y: 1 }).unwrap();
        let ops = Ops::new(&rep, [1e-2; 4], Stencil::Central4);
        let a = ConstantConnection::zero(&g);
        let phi = FnHiggs { dim: 2, f: |_p: &SpacetimePoint| CVec::from_vec(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]) };
        let (e1, e2) = ops.ymh(&a, &phi, &[0.1, 0.2, 0.0, -0.1]);
        assert!(one_form_norm(&e1) < 1e-12 && e2.norm() < 1e-12);
    }

    #[test]
    fn flat_box_of_plane_wave() {
        // Φ = sin(x¹ − 2t) on U(1) charge 0: d^*dΦ = −∂^α∂_αΦ = (∂_t² − Δ)Φ = −3Φ.
        let g = GroupSpec::u1();
        let rep = Representation::new(&g, RepSpec::Charge { n: 0 }).unwrap();
        let ops = Ops::new(&rep, [1e-2; 4], Stencil::Central4);
        let a = FnConnection { group: g, f: |_p: &SpacetimePoint| -> Coords4 { [vec![0.0], vec![0.0], vec![0.0], vec![0.0]] } };
        let phi = |p: &SpacetimePoint| CVec::from_vec(vec![Complex64::new((p[1] - 2.0 * p[0]).sin(), 0.0)]);
        let p = [0.2, 0.4, 0.0, 0.0];
        let dd = |q: &SpacetimePoint| ops.higgs_d(&a, &phi, q);
        let b = ops.higgs_d_star(&a, &dd, &p);
        assert!(b[0].re.abs() < 1e-7);
        let p = [0.1, 0.7, 0.0, 0.0];
        let b = ops.higgs_d_star(&a, &dd, &p);
        assert!((b[0].re + 3.0 * (0.7f64 - 0.2).sin()).abs() < 1e-7);
    }
}
