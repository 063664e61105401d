//! Principal-symbol calculus of the two- and threefold interactions at y.
//!
//! All symbols are rescaled ("hatted"), so the volume factors α, ι, C_α and
//! the homogeneity bookkeeping never appear. Sources follow the centre
//! scenario: b₁ = 0, υ₂ = υ₃ = 0, b₂, b₃ ∈ Z(𝔤) ∖ 0, υ₁ ≠ 0.
//!
//! Two routes are kept side by side. The *assembled* route evaluates the
//! interaction terms generically on the stored hats. The *display* route,
//! [`InteractionState::threefold_display`], writes down the closed-form
//! amplitude term by term. Their s-dependent parts differ by the constant
//! phase i, and both share the limit 2ρ_*(b₃)ρ_*(b₂)Υ̂₁ as s → 0.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{CMat, CVec, RMat, Representation};
use crate::calculus::ETA;
use crate::error::{LabError, Result};
use crate::fields::{ConnectionField, Coords4, HiggsField};
use crate::fit::loglog_slope;
use crate::geometry::{box_symbol_inv, kappa_closed, kappa_solve, Covector, InteractionGeometry};
use crate::transport::{coupled_transport, transport_rep, LightRay};

pub mod exact;

/// Pair order used for every twofold array: (12), (13), (23).
pub const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

const I: Complex64 = Complex64::new(0.0, 1.0);

fn zero4(n: usize) -> Coords4 {
    [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]]
}

/// η_α W^α for W given by lower-index components.
fn contract(eta: &Covector, w: &Coords4) -> Vec<f64> {
    let n = w[0].len();
    let mut out = vec![0.0; n];
    for al in 0..4 {
        let c = ETA[al] * eta[al];
        if c != 0.0 {
            for (o, x) in out.iter_mut().zip(&w[al]) {
                *o += c * x;
            }
        }
    }
    out
}

fn ct(c: &Covector, b: &[f64]) -> Coords4 {
    [0, 1, 2, 3].map(|al| b.iter().map(|x| c[al] * x).collect())
}

#[derive(Clone, Debug)]
pub struct InteractionState {
    pub geom: InteractionGeometry,
    pub rep: Representation,
    /// b_(k) in algebra coordinates; b_(1) = 0.
    pub b: [Vec<f64>; 3],
    pub upsilon: [CVec; 3],
    pub w_hat: [Coords4; 3],
    pub y_hat: [CVec; 3],
    pub w_pair: [Coords4; 3],
    pub y_pair: [CVec; 3],
    pub w_triple: Coords4,
    pub y_triple: CVec,
}

impl InteractionState {
    pub fn new(geom: InteractionGeometry, rep: &Representation, b2: Vec<f64>, b3: Vec<f64>, upsilon1: CVec) -> Result<Self> {
        let g = rep.group();
        let n = g.dim();
        let d = rep.dim();
        if b2.len() != n || b3.len() != n || upsilon1.len() != d {
            return Err(LabError::ShapeMismatch);
        }
        for b in [&b2, &b3] {
            if b.iter().all(|x| *x == 0.0) {
                return Err(LabError::Config("b_(2), b_(3) must be nonzero".into()));
            }
            if !g.is_central(&g.from_coords(b)?, 1e-12)? {
                return Err(LabError::NotCentral);
            }
        }
        if upsilon1.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
            return Err(LabError::Config("υ_(1) must be nonzero".into()));
        }
        let zv = CVec::zeros(d);
        Ok(InteractionState {
            geom,
            rep: rep.clone(),
            b: [vec![0.0; n], b2, b3],
            upsilon: [upsilon1, zv.clone(), zv.clone()],
            w_hat: [zero4(n), zero4(n), zero4(n)],
            y_hat: [zv.clone(), zv.clone(), zv.clone()],
            w_pair: [zero4(n), zero4(n), zero4(n)],
            y_pair: [zv.clone(), zv.clone(), zv.clone()],
            w_triple: zero4(n),
            y_triple: zv,
        })
    }

    fn act(&self, c: &[f64], v: &CVec) -> CVec {
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        self.rep.act_coords(c, v.as_slice(), &mut out);
        CVec::from_vec(out)
    }

    fn rho_star(&self, c: &[f64]) -> CMat {
        self.rep.rho_star_coords(c)
    }

    /// Ŵ_(k) = ω_(k) b_(k); Υ̂_(1) = P^{A,ρ}_{y←x₁}υ_(1), or υ_(1) for A = 0.
    pub fn initial_hats(&mut self, a: Option<&dyn ConnectionField>, tol: f64) -> Result<()> {
        let omega = [[0.0; 4], self.geom.omega2, self.geom.omega3];
        for k in 0..3 {
            self.w_hat[k] = ct(&omega[k], &self.b[k]);
        }
        self.y_hat[0] = match a {
            Some(a) => {
                let ray = LightRay::through(&self.geom.x[0], &self.geom.y)?;
                transport_rep(a, &self.rep, &ray, tol)? * &self.upsilon[0]
            }
            None => self.upsilon[0].clone(),
        };
        Ok(())
    }

    /// Generic twofold terms: Higgs channel 2i[(η_k·Ŵ_l)Υ̂_k + (η_l·Ŵ_k)Υ̂_l],
    /// YM channel −η_k 𝕁(iΥ̂_k, Υ̂_l) − η_l 𝕁(iΥ̂_l, Υ̂_k), both divided by
    /// σ[□](η_(kl)).
    pub fn twofold(&mut self) -> Result<()> {
        let n = self.rep.group().dim();
        let eta_pair = [self.geom.eta12, self.geom.eta13, self.geom.eta23];
        for (p, &(k, l)) in PAIRS.iter().enumerate() {
            let inv = box_symbol_inv(&eta_pair[p])?;
            let (ek, el) = (self.geom.eta_k[k], self.geom.eta_k[l]);
            let mut h = self.act(&contract(&ek, &self.w_hat[l]), &self.y_hat[k]);
            h += self.act(&contract(&el, &self.w_hat[k]), &self.y_hat[l]);
            self.y_pair[p] = h * (I * 2.0 * inv);
            let jk = self.rep.j_coords((&self.y_hat[k] * I).as_slice(), self.y_hat[l].as_slice());
            let jl = self.rep.j_coords((&self.y_hat[l] * I).as_slice(), self.y_hat[k].as_slice());
            let mut w = zero4(n);
            for al in 0..4 {
                for i in 0..n {
                    w[al][i] = -inv * (ek[al] * jk[i] + el[al] * jl[i]);
                }
            }
            self.w_pair[p] = w;
        }
        Ok(())
    }

    /// Generic threefold terms at the lightlike η, so no σ[□]⁻¹ is applied.
    pub fn threefold(&mut self) {
        let n = self.rep.group().dim();
        let d = self.rep.dim();
        let mut h = CVec::zeros(d);
        let mut w = zero4(n);
        // m is the single index, p the complementary pair
        for (m, p) in [(2usize, 0usize), (1, 1), (0, 2)] {
            let (k, l) = PAIRS[p];
            let eta_kl = [self.geom.eta12, self.geom.eta13, self.geom.eta23][p];
            let em = self.geom.eta_k[m];
            h += self.act(&contract(&eta_kl, &self.w_hat[m]), &self.y_pair[p]) * I;
            h += self.act(&contract(&em, &self.w_pair[p]), &self.y_hat[m]) * I;
            let mut ww = CMat::zeros(d, d);
            for al in 0..4 {
                ww += self.rho_star(&self.w_hat[k][al]) * self.rho_star(&self.w_hat[l][al]) * Complex64::from(ETA[al]);
            }
            h += ww * &self.y_hat[m] * Complex64::from(2.0);
            let kl_inner = self.y_hat[k].dotc(&self.y_hat[l]).re;
            h += &self.y_hat[m] * Complex64::from(2.0 * kl_inner);

            let ja = self.rep.j_coords((&self.y_pair[p] * I).as_slice(), self.y_hat[m].as_slice());
            let jb = self.rep.j_coords((&self.y_hat[m] * I).as_slice(), self.y_pair[p].as_slice());
            for al in 0..4 {
                for i in 0..n {
                    w[al][i] -= eta_kl[al] * ja[i] + em[al] * jb[i];
                }
                for (u, v) in [(k, l), (l, k)] {
                    let wy = self.act(&self.w_hat[m][al], &self.y_hat[u]);
                    let j = self.rep.j_coords(wy.as_slice(), self.y_hat[v].as_slice());
                    for i in 0..n {
                        w[al][i] -= j[i];
                    }
                }
            }
        }
        self.y_triple = h;
        self.w_triple = w;
    }

    pub fn run(&mut self, a: Option<&dyn ConnectionField>, tol: f64) -> Result<()> {
        self.initial_hats(a, tol)?;
        self.twofold()?;
        self.threefold();
        Ok(())
    }

    /// Closed form Υ̂_(1k) = (−1)^k(−2i)κ₁ s σ[□]⁻¹(η_(1k)) ρ_*(b_k)Υ̂₁, k ∈ {2, 3}.
    pub fn twofold_closed(&self, k: usize) -> Result<CVec> {
        let g = &self.geom;
        let eta = if k == 2 { g.eta12 } else { g.eta13 };
        let sign = if k == 2 { 1.0 } else { -1.0 };
        let c = -2.0 * I * sign * g.kappa[0] * g.s * box_symbol_inv(&eta)?;
        Ok(self.act(&self.b[k - 1], &self.y_hat[0]) * c)
    }

    /// The closed-form threefold amplitude, written exactly as
    /// (−2iκ₁(κ₁+2κ₃)s²σ⁻¹(η₁₃) − 2iκ₁(κ₁+2κ₂)s²σ⁻¹(η₁₂) + 2(1+s²)) ρ_*(b₂)ρ_*(b₃)Υ̂₁.
    pub fn threefold_display(&self) -> Result<CVec> {
        let (c, bb) = self.display_parts()?;
        Ok(bb * c)
    }

    fn display_parts(&self) -> Result<(Complex64, CVec)> {
        let g = &self.geom;
        let [k1, k2, k3] = g.kappa;
        let s2 = g.s * g.s;
        let c = -2.0 * I * k1 * (k1 + 2.0 * k3) * s2 * box_symbol_inv(&g.eta13)?
            - 2.0 * I * k1 * (k1 + 2.0 * k2) * s2 * box_symbol_inv(&g.eta12)?
            + Complex64::from(2.0 * (1.0 + s2));
        let bb = self.act(&self.b[1], &self.act(&self.b[2], &self.y_hat[0]));
        Ok((c, bb))
    }

    /// 2ρ_*(b₃)ρ_*(b₂)Υ̂₁.
    pub fn limit(&self) -> CVec {
        self.act(&self.b[2], &self.act(&self.b[1], &self.y_hat[0])) * Complex64::from(2.0)
    }

    /// Largest bracket among the hatted sources; zero for central b's.
    pub fn commutator_defect(&self) -> f64 {
        let st = self.rep.structure();
        let mut m: f64 = 0.0;
        for k in 0..3 {
            for l in 0..3 {
                m = m.max(st.bracket(&self.b[k], &self.b[l]).iter().map(|x| x.abs()).fold(0.0, f64::max));
            }
        }
        m
    }
}

/// C_b = 2ρ_*(b₃)ρ_*(b₂).
pub fn c_b(rep: &Representation, b2: &[f64], b3: &[f64]) -> CMat {
    rep.rho_star_coords(b3) * rep.rho_star_coords(b2) * Complex64::from(2.0)
}

/// (YM component, Higgs component) at z up to the opaque C_α:
/// (C_b (P^{A,Φ,ρ}_{z←y})₁₂ P^{A,ρ}_{y←x}υ₁, C_b P^{A,ρ}_{z←y}P^{A,ρ}_{y←x}υ₁).
pub fn propagate_to_z<A, P>(state: &InteractionState, a: &A, phi: &P, tol: f64) -> Result<(Coords4, CVec)>
where
    A: ConnectionField + ?Sized,
    P: HiggsField + ?Sized,
{
    let g = &state.geom;
    let rep = &state.rep;
    let pyx = transport_rep(a, rep, &LightRay::through(&g.x[0], &g.y)?, tol)?;
    let v = c_b(rep, &state.b[1], &state.b[2]) * pyx * &state.upsilon[0];
    let bt = coupled_transport(a, phi, rep, &LightRay::through(&g.y, &g.z)?, tol)?;
    let ym = [0, 1, 2, 3].map(|beta| bt.apply_block12(beta, &v));
    Ok((ym, bt.p_rho() * v))
}

/// S_Ad applied to [b₂, [b₁, b₂]].
pub fn ad_channel_bracket_observable(rep: &Representation, b1: &[f64], b2: &[f64], s_ad: &RMat) -> Vec<f64> {
    let st = rep.structure();
    let inner = st.bracket(b1, b2);
    let nested = st.bracket(b2, &inner);
    (s_ad * nalgebra::DVector::from_vec(nested)).iter().cloned().collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KappaAgreement {
    pub samples: usize,
    pub max_diff: f64,
}

/// Closed-form κ against the linear solve over a deterministic (r, s) lattice
/// of `samples` points in (−0.9, 0.9) × (0.05, 0.95).
pub fn kappa_agreement(samples: usize) -> Result<KappaAgreement> {
    let side = (samples as f64).sqrt().ceil() as usize;
    let pts: Vec<(f64, f64)> = (0..samples)
        .map(|i| {
            let (a, b) = (i % side, i / side);
            let r = -0.9 + 1.8 * (a as f64 + 0.5) / side as f64;
            let s = 0.05 + 0.9 * (b as f64 + 0.5) / side as f64;
            (r, s)
        })
        .collect();
    let diffs: Result<Vec<f64>> = pts
        .par_iter()
        .map(|&(r, s)| {
            let c = kappa_closed(r, s)?;
            let l = kappa_solve(r, s)?;
            Ok((0..3).map(|i| (c[i] - l[i]).abs() / c[i].abs().max(1.0)).fold(0.0, f64::max))
        })
        .collect();
    Ok(KappaAgreement {
        samples,
        max_diff: diffs?.into_iter().fold(0.0, f64::max),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepPoint {
    pub s: f64,
    pub display_remainder: f64,
    pub assembled_remainder: f64,
    pub display_norm: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThreefoldSweep {
    pub r: f64,
    pub limit_norm: f64,
    pub points: Vec<SweepPoint>,
    pub display_slope: Option<f64>,
    pub assembled_slope: Option<f64>,
    /// max ‖Ŵ_(123)‖ and ‖Υ̂_(23)‖ along the sweep.
    pub max_w_triple: f64,
    pub max_y23: f64,
}

/// Runs the full hat calculus for each s with A = 0 and fits the remainder
/// |amp(s) − 2ρ_*(b₃)ρ_*(b₂)Υ̂₁| against s.
pub fn threefold_sweep(rep: &Representation, r: f64, s_list: &[f64], eps0: f64, b2: &[f64], b3: &[f64], upsilon1: &CVec) -> Result<ThreefoldSweep> {
    let mut points = Vec::with_capacity(s_list.len());
    let mut limit_norm = 0.0;
    let (mut max_w, mut max_y23): (f64, f64) = (0.0, 0.0);
    for &s in s_list {
        let geom = InteractionGeometry::build(r, s, eps0)?;
        let mut st = InteractionState::new(geom, rep, b2.to_vec(), b3.to_vec(), upsilon1.clone())?;
        st.run(None, 1e-12)?;
        let lim = st.limit();
        limit_norm = lim.norm();
        let disp = st.threefold_display()?;
        max_w = max_w.max(st.w_triple.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max));
        max_y23 = max_y23.max(st.y_pair[2].norm());
        points.push(SweepPoint {
            s,
            display_remainder: (&disp - &lim).norm(),
            assembled_remainder: (&st.y_triple - &lim).norm(),
            display_norm: disp.norm(),
        });
    }
    let ss: Vec<f64> = points.iter().map(|p| p.s).collect();
    let dr: Vec<f64> = points.iter().map(|p| p.display_remainder).collect();
    let ar: Vec<f64> = points.iter().map(|p| p.assembled_remainder).collect();
    Ok(ThreefoldSweep {
        r,
        limit_norm,
        display_slope: loglog_slope(&ss, &dr),
        assembled_slope: loglog_slope(&ss, &ar),
        points,
        max_w_triple: max_w,
        max_y23,
    })
}

/// Unit central source direction: the first centre basis vector.
pub fn central_direction(rep: &Representation) -> Result<Vec<f64>> {
    rep.group()
        .centre_basis()
        .into_iter()
        .next()
        .ok_or_else(|| LabError::Config("the Lie algebra has trivial centre".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{GroupSpec, RepSpec};
    use crate::geometry::DEFAULT_EPS0;

    fn u1_state(r: f64, s: f64) -> InteractionState {
        let g = GroupSpec::u1();
        let rep = Representation::new(&g, RepSpec::Charge { n: 1 }).unwrap();
        let geom = InteractionGeometry::build(r, s, DEFAULT_EPS0).unwrap();
        let mut st = InteractionState::new(geom, &rep, vec![0.7], vec![-1.3], CVec::from_vec(vec![Complex64::new(0.4, 0.9)])).unwrap();
        st.run(None, 1e-12).unwrap();
        st
    }

    #[test]
    fn spot_coefficient_of_the_twofold_term() {
        let st = u1_state(0.0, 0.6);
        // coefficient of ρ_*(b₂)Υ̂₁ in Υ̂_(12) is +0.6i
        let base = st.act(&st.b[1], &st.y_hat[0]);
        let want = &base * Complex64::new(0.0, 0.6);
        assert!((&st.y_pair[0] - &want).norm() < 1e-12);
        assert!((st.twofold_closed(2).unwrap() - &st.y_pair[0]).norm() < 1e-12);
        assert!((st.twofold_closed(3).unwrap() - &st.y_pair[1]).norm() < 1e-12);
    }

    #[test]
    fn routes_differ_by_a_phase_only_in_the_s_terms() {
        let st = u1_state(0.2, 0.3);
        let lim_part = st.act(&st.b[1], &st.act(&st.b[2], &st.y_hat[0])) * Complex64::from(2.0 * (1.0 + 0.09));
        let disp = st.threefold_display().unwrap() - &lim_part;
        let asm = &st.y_triple - &lim_part;
        assert!((asm - disp * I).norm() < 1e-12);
    }

    #[test]
    fn non_central_source_is_rejected() {
        let g = GroupSpec::electroweak();
        let rep = Representation::new(&g, RepSpec::Electroweak { n_y: 3 }).unwrap();
        let geom = InteractionGeometry::build(0.0, 0.5, DEFAULT_EPS0).unwrap();
        let mut b = vec![0.0; 4];
        b[1] = 1.0;
        let c = central_direction(&rep).unwrap();
        let u = CVec::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        assert!(matches!(InteractionState::new(geom.clone(), &rep, b, c.clone(), u.clone()), Err(LabError::NotCentral)));
        assert!(InteractionState::new(geom, &rep, c.clone(), c, u).is_ok());
    }
}
