//! Pointwise lower-order terms of the perturbed and linearized systems,
//! evaluated from first-order jets.
//!
//! Star conventions on 1-forms: ⋆[W, ⋆ω]_β = −[W^α, ω_αβ] and
//! ⋆(ρ_*(W) ∧ ⋆θ) = −ρ_*(W^α)θ_α. Indices are raised with ETA.

use num_complex::Complex64;

use crate::algebra::{Representation, Structure};
use crate::calculus::{norm_sq, partial, re_inner, Stencil, TwoForm, ETA};
use crate::fields::{ConnectionField, Coords4, HiggsField};
use crate::geometry::SpacetimePoint;

type C = Complex64;
type HForm = [Vec<C>; 4];

const CZ: C = C::new(0.0, 0.0);

fn zeros4(n: usize) -> Coords4 {
    [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]]
}

fn hzeros4(d: usize) -> HForm {
    [vec![CZ; d], vec![CZ; d], vec![CZ; d], vec![CZ; d]]
}

fn axpy(out: &mut [f64], s: f64, x: &[f64]) {
    for (o, v) in out.iter_mut().zip(x) {
        *o += s * v;
    }
}

fn caxpy(out: &mut [C], s: C, x: &[C]) {
    for (o, v) in out.iter_mut().zip(x) {
        *o += s * v;
    }
}

/// Values and first partials of a perturbation (W, Υ); `dw[γ][α]` = ∂_γW_α.
#[derive(Clone, Debug)]
pub struct FieldJet {
    pub w: Coords4,
    pub dw: [Coords4; 4],
    pub y: Vec<C>,
    pub dy: HForm,
}

impl FieldJet {
    pub fn zero(n: usize, d: usize) -> Self {
        FieldJet { w: zeros4(n), dw: [zeros4(n), zeros4(n), zeros4(n), zeros4(n)], y: vec![CZ; d], dy: hzeros4(d) }
    }

    pub fn sample<W, Y>(w: &W, y: &Y, p: &SpacetimePoint, h: f64) -> Self
    where
        W: ConnectionField + ?Sized,
        Y: HiggsField + ?Sized,
    {
        let fw = |q: &SpacetimePoint| w.coords(q);
        let fy = |q: &SpacetimePoint| y.value(q);
        FieldJet {
            w: w.coords(p),
            dw: [0, 1, 2, 3].map(|g| partial(&fw, p, g, h, Stencil::Central4)),
            y: y.value(p).iter().cloned().collect(),
            dy: [0, 1, 2, 3].map(|g| partial(&fy, p, g, h, Stencil::Central4).iter().cloned().collect()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.w.iter().flatten().all(|v| *v == 0.0)
            && self.dw.iter().flatten().flatten().all(|v| *v == 0.0)
            && self.y.iter().all(|v| *v == CZ)
            && self.dy.iter().flatten().all(|v| *v == CZ)
    }
}

/// Background (A, Φ) at a point: values, partials, curvature, ∂^αA_α and d_AΦ.
#[derive(Clone, Debug)]
pub struct BackgroundJet {
    pub a: Coords4,
    pub f: TwoForm,
    pub div: Vec<f64>,
    pub phi: Vec<C>,
    pub dphi: HForm,
    pub cov_dphi: HForm,
}

impl BackgroundJet {
    pub fn sample<A, P>(a: &A, phi: &P, rep: &Representation, p: &SpacetimePoint, h: f64) -> Self
    where
        A: ConnectionField + ?Sized,
        P: HiggsField + ?Sized,
    {
        let s = rep.structure();
        let n = s.dim();
        let fa = |q: &SpacetimePoint| a.coords(q);
        let fp = |q: &SpacetimePoint| phi.value(q);
        let av = a.coords(p);
        let da: [Coords4; 4] = [0, 1, 2, 3].map(|g| partial(&fa, p, g, h, Stencil::Central4));
        let mut f: TwoForm = Default::default();
        for al in 0..4 {
            for be in 0..4 {
                let mut v = vec![0.0; n];
                if al != be {
                    axpy(&mut v, 1.0, &da[al][be]);
                    axpy(&mut v, -1.0, &da[be][al]);
                    s.bracket_acc(&av[al], &av[be], 1.0, &mut v);
                }
                f[al][be] = v;
            }
        }
        let mut div = vec![0.0; n];
        for al in 0..4 {
            axpy(&mut div, ETA[al], &da[al][al]);
        }
        let pv: Vec<C> = phi.value(p).iter().cloned().collect();
        let dphi: HForm = [0, 1, 2, 3].map(|g| partial(&fp, p, g, h, Stencil::Central4).iter().cloned().collect());
        let cov_dphi = [0, 1, 2, 3].map(|g| {
            let mut v = dphi[g].clone();
            rep.act_coords(&av[g], &pv, &mut v);
            v
        });
        BackgroundJet { a: av, f, div, phi: pv, dphi, cov_dphi }
    }
}

/// Evaluator for every lower-order term; all outputs are lower-index.
pub struct Terms<'a> {
    pub rep: &'a Representation,
    s: &'a Structure,
    n: usize,
    d: usize,
}

impl<'a> Terms<'a> {
    pub fn new(rep: &'a Representation) -> Self {
        let s = rep.structure();
        Terms { rep, s, n: s.dim(), d: rep.dim() }
    }

    fn act(&self, x: &[f64], v: &[C]) -> Vec<C> {
        let mut out = vec![CZ; self.d];
        self.rep.act_coords(x, v, &mut out);
        out
    }

    /// (d_AΥ)_β for a Higgs jet.
    pub fn cov(&self, bg: &BackgroundJet, y: &[C], dy: &HForm) -> HForm {
        [0, 1, 2, 3].map(|b| {
            let mut v = dy[b].clone();
            self.rep.act_coords(&bg.a[b], y, &mut v);
            v
        })
    }

    /// (D_AW)_αβ.
    pub fn cov_w(&self, bg: &BackgroundJet, jet: &FieldJet) -> TwoForm {
        let mut out: TwoForm = Default::default();
        for al in 0..4 {
            for be in 0..4 {
                let mut v = vec![0.0; self.n];
                if al != be {
                    axpy(&mut v, 1.0, &jet.dw[al][be]);
                    axpy(&mut v, -1.0, &jet.dw[be][al]);
                    self.s.bracket_acc(&bg.a[al], &jet.w[be], 1.0, &mut v);
                    self.s.bracket_acc(&bg.a[be], &jet.w[al], -1.0, &mut v);
                }
                out[al][be] = v;
            }
        }
        out
    }

    /// □_{A,Ad}W + ∂^α∂_αW: −[∂^αA_α, W_β] − 2[A^α, ∂_αW_β] − [A^α,[A_α,W_β]] + [F^α_β, W_α].
    pub fn box_lower_ym(&self, bg: &BackgroundJet, jet: &FieldJet) -> Coords4 {
        let mut out = zeros4(self.n);
        for be in 0..4 {
            let o = &mut out[be];
            self.s.bracket_acc(&bg.div, &jet.w[be], -1.0, o);
            for al in 0..4 {
                self.s.bracket_acc(&bg.a[al], &jet.dw[al][be], -2.0 * ETA[al], o);
                let inner = self.s.bracket(&bg.a[al], &jet.w[be]);
                self.s.bracket_acc(&bg.a[al], &inner, -ETA[al], o);
                self.s.bracket_acc(&bg.f[al][be], &jet.w[al], ETA[al], o);
            }
        }
        out
    }

    /// □_{A,ρ}Υ + ∂^α∂_αΥ.
    pub fn box_lower_higgs(&self, bg: &BackgroundJet, y: &[C], dy: &HForm) -> Vec<C> {
        let mut out = vec![CZ; self.d];
        let dv = self.act(&bg.div, y);
        caxpy(&mut out, C::from(-1.0), &dv);
        for al in 0..4 {
            let e = C::from(ETA[al]);
            caxpy(&mut out, -2.0 * e, &self.act(&bg.a[al], &dy[al]));
            let inner = self.act(&bg.a[al], y);
            caxpy(&mut out, -e, &self.act(&bg.a[al], &inner));
        }
        out
    }

    /// ⋆[W, ⋆G] for a 2-form G.
    pub fn star_bracket(&self, w: &Coords4, g: &TwoForm) -> Coords4 {
        let mut out = zeros4(self.n);
        for be in 0..4 {
            for al in 0..4 {
                self.s.bracket_acc(&w[al], &g[al][be], -ETA[al], &mut out[be]);
            }
        }
        out
    }

    /// ⋆(ρ_*(W) ∧ ⋆θ).
    pub fn star_act(&self, w: &Coords4, th: &HForm) -> Vec<C> {
        let mut out = vec![CZ; self.d];
        for al in 0..4 {
            caxpy(&mut out, C::from(-ETA[al]), &self.act(&w[al], &th[al]));
        }
        out
    }

    /// d_A^*(ρ_*(W)X) from jets of W and X.
    pub fn d_star_act(&self, bg: &BackgroundJet, jet: &FieldJet, x: &[C], dx: &HForm) -> Vec<C> {
        let mut out = vec![CZ; self.d];
        for al in 0..4 {
            let mut t = self.act(&jet.dw[al][al], x);
            caxpy(&mut t, C::from(1.0), &self.act(&jet.w[al], &dx[al]));
            let wx = self.act(&jet.w[al], x);
            caxpy(&mut t, C::from(1.0), &self.act(&bg.a[al], &wx));
            caxpy(&mut out, C::from(-ETA[al]), &t);
        }
        out
    }

    fn act_form(&self, w: &Coords4, x: &[C]) -> HForm {
        [0, 1, 2, 3].map(|a| self.act(&w[a], x))
    }

    fn j_form(&self, v: &HForm, w: &[C], s: f64, out: &mut Coords4) {
        for b in 0..4 {
            self.rep.j_acc(&v[b], w, s, &mut out[b]);
        }
    }

    /// Quadratic part of 𝒩_A(W): ½D_A^*[W,W] + ⋆[W, ⋆D_AW].
    pub fn n_a_quadratic(&self, bg: &BackgroundJet, jet: &FieldJet) -> Coords4 {
        let n = self.n;
        let mut out = zeros4(n);
        // ½[W,W]_αβ = [W_α, W_β]
        for be in 0..4 {
            for al in 0..4 {
                if al == be {
                    continue;
                }
                let mut db = vec![0.0; n];
                self.s.bracket_acc(&jet.dw[al][al], &jet.w[be], 1.0, &mut db);
                self.s.bracket_acc(&jet.w[al], &jet.dw[al][be], 1.0, &mut db);
                axpy(&mut out[be], -ETA[al], &db);
                let b = self.s.bracket(&jet.w[al], &jet.w[be]);
                self.s.bracket_acc(&bg.a[al], &b, -ETA[al], &mut out[be]);
            }
        }
        let dw = self.cov_w(bg, jet);
        let sb = self.star_bracket(&jet.w, &dw);
        for be in 0..4 {
            axpy(&mut out[be], 1.0, &sb[be]);
        }
        out
    }

    /// Cubic part ½⋆[W, ⋆[W,W]].
    pub fn n_a_cubic(&self, jet: &FieldJet) -> Coords4 {
        let mut b: TwoForm = Default::default();
        for al in 0..4 {
            for be in 0..4 {
                b[al][be] = self.s.bracket(&jet.w[al], &jet.w[be]);
            }
        }
        self.star_bracket(&jet.w, &b)
    }

    /// 𝓜¹, 𝓜², 𝓜³.
    pub fn m_terms(&self, bg: &BackgroundJet, jet: &FieldJet) -> [Coords4; 3] {
        let (phi, y) = (&bg.phi, &jet.y);
        let dy = self.cov(bg, y, &jet.dy);
        let wphi = self.act_form(&jet.w, phi);
        let wy = self.act_form(&jet.w, y);
        let mut m = [zeros4(self.n), zeros4(self.n), zeros4(self.n)];
        self.j_form(&dy, phi, 1.0, &mut m[0]);
        self.j_form(&bg.cov_dphi, y, 1.0, &mut m[0]);
        self.j_form(&wphi, phi, 1.0, &mut m[0]);
        self.j_form(&dy, y, 1.0, &mut m[1]);
        self.j_form(&wy, phi, 1.0, &mut m[1]);
        self.j_form(&wphi, y, 1.0, &mut m[1]);
        self.j_form(&wy, y, 1.0, &mut m[2]);
        m
    }

    /// 𝒩¹, 𝒩², 𝒩³.
    pub fn n_terms(&self, bg: &BackgroundJet, jet: &FieldJet) -> [Vec<C>; 3] {
        let (phi, y) = (&bg.phi, &jet.y);
        let re = re_inner(phi, y);
        let y2 = norm_sq(y);
        let dy = self.cov(bg, y, &jet.dy);

        let mut n1 = self.d_star_act(bg, jet, phi, &bg.dphi);
        caxpy(&mut n1, C::from(1.0), &self.star_act(&jet.w, &bg.cov_dphi));
        caxpy(&mut n1, C::from(2.0 * re), phi);
        caxpy(&mut n1, C::from(norm_sq(phi) - 1.0), y);

        let mut n2 = self.star_act(&jet.w, &self.act_form(&jet.w, phi));
        caxpy(&mut n2, C::from(1.0), &self.d_star_act(bg, jet, y, &jet.dy));
        caxpy(&mut n2, C::from(1.0), &self.star_act(&jet.w, &dy));
        caxpy(&mut n2, C::from(2.0 * re), y);
        caxpy(&mut n2, C::from(y2), phi);

        let mut n3 = self.star_act(&jet.w, &self.act_form(&jet.w, y));
        caxpy(&mut n3, C::from(y2), y);
        [n1, n2, n3]
    }

    /// Full connection equation minus the flat principal part and the source:
    /// □_{A,Ad}W + ∂^α∂_αW + ⋆[W,⋆F_A] + 𝒩_A(W) + Σ𝓜^i.
    pub fn ym_lower(&self, bg: &BackgroundJet, jet: &FieldJet) -> Coords4 {
        let mut out = self.box_lower_ym(bg, jet);
        let parts = [self.star_bracket(&jet.w, &bg.f), self.n_a_quadratic(bg, jet), self.n_a_cubic(jet)];
        let m = self.m_terms(bg, jet);
        for t in parts.iter().chain(m.iter()) {
            for be in 0..4 {
                axpy(&mut out[be], 1.0, &t[be]);
            }
        }
        out
    }

    pub fn higgs_lower(&self, bg: &BackgroundJet, jet: &FieldJet) -> Vec<C> {
        let mut out = self.box_lower_higgs(bg, &jet.y, &jet.dy);
        for t in self.n_terms(bg, jet) {
            caxpy(&mut out, C::from(1.0), &t);
        }
        out
    }

    /// Linearized connection equation: □_{A,Ad}W + ∂^α∂_αW + 𝕁(d_AΥ,Φ) + Z.
    pub fn ym_linear(&self, bg: &BackgroundJet, jet: &FieldJet) -> Coords4 {
        let mut out = self.box_lower_ym(bg, jet);
        let sb = self.star_bracket(&jet.w, &bg.f);
        let dy = self.cov(bg, &jet.y, &jet.dy);
        for be in 0..4 {
            axpy(&mut out[be], 1.0, &sb[be]);
        }
        self.j_form(&dy, &bg.phi, 1.0, &mut out);
        self.j_form(&bg.cov_dphi, &jet.y, 1.0, &mut out);
        self.j_form(&self.act_form(&jet.w, &bg.phi), &bg.phi, 1.0, &mut out);
        out
    }

    /// Linearized Higgs equation with the gauge-simplified
    /// 𝒵 = 2⋆(ρ_*(W) ∧ ⋆d_AΦ) + 𝒱'(|Φ|²)Υ + 2Re⟨Φ,Υ⟩Φ.
    pub fn higgs_linear(&self, bg: &BackgroundJet, jet: &FieldJet) -> Vec<C> {
        let mut out = self.box_lower_higgs(bg, &jet.y, &jet.dy);
        caxpy(&mut out, C::from(2.0), &self.star_act(&jet.w, &bg.cov_dphi));
        caxpy(&mut out, C::from(norm_sq(&bg.phi) - 1.0), &jet.y);
        caxpy(&mut out, C::from(2.0 * re_inner(&bg.phi, &jet.y)), &bg.phi);
        out
    }

    /// Linear part of the full Higgs expansion, without using D_A^*W = 0.
    pub fn higgs_linear_exact(&self, bg: &BackgroundJet, jet: &FieldJet) -> Vec<C> {
        let mut out = self.box_lower_higgs(bg, &jet.y, &jet.dy);
        caxpy(&mut out, C::from(1.0), &self.d_star_act(bg, jet, &bg.phi, &bg.dphi));
        caxpy(&mut out, C::from(1.0), &self.star_act(&jet.w, &bg.cov_dphi));
        caxpy(&mut out, C::from(norm_sq(&bg.phi) - 1.0), &jet.y);
        caxpy(&mut out, C::from(2.0 * re_inner(&bg.phi, &jet.y)), &bg.phi);
        out
    }

    /// Right-hand side Ñ_(kl) + R_(kl) of the second-order connection equation
    /// over a flat background (A = 0).
    pub fn pair_ym(&self, bg: &BackgroundJet, k: &FieldJet, l: &FieldJet) -> Coords4 {
        let n = self.n;
        let mut out = zeros4(n);
        // −d^*[W_k ∧ W_l], [W_k ∧ W_l]_αβ = [W_kα, W_lβ] − [W_kβ, W_lα]
        for be in 0..4 {
            for al in 0..4 {
                if al == be {
                    continue;
                }
                let mut dc = vec![0.0; n];
                self.s.bracket_acc(&k.dw[al][al], &l.w[be], 1.0, &mut dc);
                self.s.bracket_acc(&k.w[al], &l.dw[al][be], 1.0, &mut dc);
                self.s.bracket_acc(&k.dw[al][be], &l.w[al], -1.0, &mut dc);
                self.s.bracket_acc(&k.w[be], &l.dw[al][al], -1.0, &mut dc);
                axpy(&mut out[be], ETA[al], &dc);
            }
        }
        for (u, v) in [(k, l), (l, k)] {
            let dv = self.cov_w(bg, v);
            let sb = self.star_bracket(&u.w, &dv);
            for be in 0..4 {
                axpy(&mut out[be], -1.0, &sb[be]);
            }
            self.j_form(&u.dy, &v.y, -1.0, &mut out);
            self.j_form(&self.act_form(&u.w, &v.y), &bg.phi, -1.0, &mut out);
            self.j_form(&self.act_form(&u.w, &bg.phi), &v.y, -1.0, &mut out);
        }
        out
    }

    /// Right-hand side 𝒩̃_(kl) + 𝓡_(kl) of the second-order Higgs equation.
    /// With `exact`, d^*(ρ_*(W_k)Υ_l) + ⋆(ρ_*(W_k) ∧ ⋆dΥ_l) is kept instead of
    /// its Lorenz-gauge form 2⋆(ρ_*(W_k) ∧ ⋆dΥ_l).
    pub fn pair_higgs(&self, bg: &BackgroundJet, k: &FieldJet, l: &FieldJet, exact: bool) -> Vec<C> {
        let mut out = vec![CZ; self.d];
        let phi = &bg.phi;
        for (u, v) in [(k, l), (l, k)] {
            if exact {
                caxpy(&mut out, C::from(-1.0), &self.d_star_act(bg, u, &v.y, &v.dy));
                caxpy(&mut out, C::from(-1.0), &self.star_act(&u.w, &v.dy));
            } else {
                caxpy(&mut out, C::from(-2.0), &self.star_act(&u.w, &v.dy));
            }
            caxpy(&mut out, C::from(-1.0), &self.star_act(&u.w, &self.act_form(&v.w, phi)));
            caxpy(&mut out, C::from(-2.0 * re_inner(phi, &v.y)), &u.y);
        }
        caxpy(&mut out, C::from(-2.0 * re_inner(&l.y, &k.y)), phi);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{GroupSpec, RepSpec};
    use crate::calculus::{Lin, Ops};
    use crate::fields::{FnConnection, FnHiggs, SmoothConnection, SmoothHiggs};

    fn setup() -> (GroupSpec, Representation) {
        let g = GroupSpec::electroweak();
        let rep = Representation::new(&g, RepSpec::Electroweak { n_y: 3 }).unwrap();
        (g, rep)
    }

    #[test]
    fn connection_wave_expansion_matches_hodge_form() {
        // □_{A,Ad} = D_A^*D_A + D_AD_A^*, against nested finite differences
        let (g, rep) = setup();
        let a = SmoothConnection::random(&g, 3, 0.4, false);
        let w = SmoothConnection::random(&g, 4, 0.4, false);
        let y = SmoothHiggs::random(rep.dim(), 5, 0.3);
        let p = [0.1, -0.2, 0.3, 0.05];
        let h = 1e-3;
        let ops = Ops::new(&rep, [h; 4], Stencil::Central4);
        let s = rep.structure();
        let dw = |q: &SpacetimePoint| {
            let av = a.coords(q);
            let wv = w.coords(q);
            let fw = |r: &SpacetimePoint| w.coords(r);
            let d: [Coords4; 4] = [0, 1, 2, 3].map(|g| partial(&fw, q, g, h, Stencil::Central4));
            let mut out: TwoForm = Default::default();
            for al in 0..4 {
                for be in 0..4 {
                    let mut v = vec![0.0; s.dim()];
                    if al != be {
                        axpy(&mut v, 1.0, &d[al][be]);
                        axpy(&mut v, -1.0, &d[be][al]);
                        s.bracket_acc(&av[al], &wv[be], 1.0, &mut v);
                        s.bracket_acc(&av[be], &wv[al], -1.0, &mut v);
                    }
                    out[al][be] = v;
                }
            }
            out
        };
        let mut lhs = ops.d_star_two(&a, &dw, &p);
        let dsw = |q: &SpacetimePoint| ops.d_star_one(&a, &|r: &SpacetimePoint| w.coords(r), q);
        let av = a.coords(&p);
        for be in 0..4 {
            let d = partial(&dsw, &p, be, h, Stencil::Central4);
            axpy(&mut lhs[be], 1.0, &d);
            s.bracket_acc(&av[be], &dsw(&p), 1.0, &mut lhs[be]);
        }
        let t = Terms::new(&rep);
        let bg = BackgroundJet::sample(&a, &y, &rep, &p, h);
        let jet = FieldJet::sample(&w, &y, &p, h);
        let mut rhs = t.box_lower_ym(&bg, &jet);
        // flat part −∂^α∂_αW
        for al in 0..4 {
            let fw = |q: &SpacetimePoint| partial(&|r: &SpacetimePoint| w.coords(r), q, al, h, Stencil::Central4);
            let dd = partial(&fw, &p, al, h, Stencil::Central4);
            rhs.axpy(-ETA[al], &dd);
        }
        for be in 0..4 {
            for i in 0..s.dim() {
                assert!((lhs[be][i] - rhs[be][i]).abs() < 1e-5, "{be} {i}: {} vs {}", lhs[be][i], rhs[be][i]);
            }
        }
    }

    #[test]
    fn expansion_reproduces_full_operator() {
        // E(A+W, Φ+Υ) − E(A, Φ) − D_A^*D_AW − d_A^*d_AΥ = ⋆[W,⋆F] + 𝒩_A + Σ𝓜, Σ𝒩
        let (g, rep) = setup();
        let a = SmoothConnection::random(&g, 7, 0.3, false);
        let w = SmoothConnection::random(&g, 8, 0.3, false);
        let phi = SmoothHiggs::random(rep.dim(), 9, 0.4);
        let y = SmoothHiggs::random(rep.dim(), 10, 0.3);
        let v = FnConnection {
            group: g.clone(),
            f: |q: &SpacetimePoint| {
                let mut c = a.coords(q);
                c.axpy(1.0, &w.coords(q));
                c
            },
        };
        let psi = FnHiggs { dim: rep.dim(), f: |q: &SpacetimePoint| phi.value(q) + y.value(q) };
        let p = [0.2, 0.1, -0.1, 0.3];
        let h = 1e-3;
        let ops = Ops::new(&rep, [h; 4], Stencil::Central4);
        let (ev, hv) = ops.ymh(&v, &psi, &p);
        let (ea, ha) = ops.ymh(&a, &phi, &p);
        let t = Terms::new(&rep);
        let bg = BackgroundJet::sample(&a, &phi, &rep, &p, h);
        let jet = FieldJet::sample(&w, &y, &p, h);

        // linear principal parts via the zero-Higgs operator on the perturbation
        let zero_h = FnHiggs { dim: rep.dim(), f: |_: &SpacetimePoint| crate::algebra::CVec::zeros(rep.dim()) };
        let wa = FnConnection { group: g.clone(), f: |q: &SpacetimePoint| w.coords(q) };
        let fdw = |q: &SpacetimePoint| {
            let bgq = BackgroundJet::sample(&a, &zero_h, &rep, q, h);
            let jq = FieldJet::sample(&wa, &zero_h, q, h);
            t.cov_w(&bgq, &jq)
        };
        let dd = ops.d_star_two(&a, &fdw, &p);
        let dy = |q: &SpacetimePoint| ops.higgs_d(&a, &|r: &SpacetimePoint| y.value(r), q);
        let ddy = ops.higgs_d_star(&a, &dy, &p);

        let mut expect = t.star_bracket(&jet.w, &bg.f);
        expect.axpy(1.0, &t.n_a_quadratic(&bg, &jet));
        expect.axpy(1.0, &t.n_a_cubic(&jet));
        for m in t.m_terms(&bg, &jet) {
            expect.axpy(1.0, &m);
        }
        for be in 0..4 {
            for i in 0..g.dim() {
                let got = ev[be][i] - ea[be][i] - dd[be][i];
                assert!((got - expect[be][i]).abs() < 1e-5, "ym {be} {i}: {got} vs {}", expect[be][i]);
            }
        }
        let nt = t.n_terms(&bg, &jet);
        for r in 0..rep.dim() {
            let got = hv[r] - ha[r] - ddy[r];
            let e = nt[0][r] + nt[1][r] + nt[2][r];
            assert!((got - e).norm() < 1e-5, "higgs {r}: {got} vs {e}");
        }
    }

    #[test]
    fn homogeneity_degrees() {
        let (g, rep) = setup();
        let a = SmoothConnection::random(&g, 11, 0.3, false);
        let phi = SmoothHiggs::random(rep.dim(), 12, 0.4);
        let w = SmoothConnection::random(&g, 13, 0.3, false);
        let y = SmoothHiggs::random(rep.dim(), 14, 0.3);
        let p = [0.0, 0.1, 0.2, -0.1];
        let t = Terms::new(&rep);
        let bg = BackgroundJet::sample(&a, &phi, &rep, &p, 1e-3);
        let jet = FieldJet::sample(&w, &y, &p, 1e-3);
        let lam = 0.37;
        let mut sj = jet.clone();
        for x in sj.w.iter_mut().chain(sj.dw.iter_mut().flatten()) {
            x.iter_mut().for_each(|v| *v *= lam);
        }
        for x in std::iter::once(&mut sj.y).chain(sj.dy.iter_mut()) {
            x.iter_mut().for_each(|v| *v *= lam);
        }
        let close = |a: &Coords4, b: &Coords4, k: i32| {
            a.iter().flatten().zip(b.iter().flatten()).all(|(x, y)| (x - lam.powi(k) * y).abs() < 1e-12)
        };
        assert!(close(&t.n_a_quadratic(&bg, &sj), &t.n_a_quadratic(&bg, &jet), 2));
        assert!(close(&t.n_a_cubic(&sj), &t.n_a_cubic(&jet), 3));
        let (ms, m) = (t.m_terms(&bg, &sj), t.m_terms(&bg, &jet));
        for k in 0..3 {
            assert!(close(&ms[k], &m[k], k as i32 + 1));
        }
        let (ns, nn) = (t.n_terms(&bg, &sj), t.n_terms(&bg, &jet));
        for k in 0..3 {
            for (x, y) in ns[k].iter().zip(&nn[k]) {
                assert!((x - y * lam.powi(k as i32 + 1)).norm() < 1e-12);
            }
        }
    }
}
