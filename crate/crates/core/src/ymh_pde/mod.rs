//! Leapfrog solver for the perturbed Yang–Mills–Higgs system around a
//! closed-form background (A, Φ), with the time component of the current
//! determined by the compatibility condition
//!
//!   ∂_tJ_0 + [V_0, J_0] = ∂^jJ_j + [V^j, J_j] + 𝕁_ρ(𝓕, Ψ),
//!
//! integrated with the trapezoid rule. Grids cover [−L, L]³ with Dirichlet
//! zero data on the boundary; unknowns vanish for t ≤ t₀.

pub mod reduced;
pub mod terms;

use std::borrow::Cow;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::Representation;
use crate::error::{LabError, Result};
use crate::fields::{ConnectionField, Coords4, HiggsField};
use crate::geometry::SpacetimePoint;
use terms::{BackgroundJet, FieldJet, Terms};

type C = Complex64;
const CZ: C = C::new(0.0, 0.0);

pub const MAX_PICARD: usize = 8;
pub const PICARD_TOL: f64 = 1e-10;
/// Finite-difference step for background jets.
pub const BACKGROUND_FD_STEP: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    /// Points per spatial dimension, boundary included.
    pub points: usize,
    pub half_width: f64,
    pub t0: f64,
    pub dt: f64,
    pub steps: usize,
}

impl Grid {
    pub fn new(points: usize, half_width: f64, t0: f64, dt: f64, steps: usize) -> Result<Self> {
        if points < 3 || half_width <= 0.0 || dt <= 0.0 {
            return Err(LabError::Config("grid needs ≥ 3 points, L > 0 and Δt > 0".into()));
        }
        let g = Grid { points, half_width, t0, dt, steps };
        if dt > g.dx() / 3f64.sqrt() * (1.0 + 1e-12) {
            return Err(LabError::CflViolation { dt, dx: g.dx() });
        }
        Ok(g)
    }

    /// Spacing Δx with Δt = courant·Δx and enough steps to reach t₀ + duration.
    pub fn with_spacing(dx: f64, half_width: f64, t0: f64, duration: f64, courant: f64) -> Result<Self> {
        let points = (2.0 * half_width / dx).round() as usize + 1;
        let dt = courant * dx;
        let steps = (duration / dt).round() as usize;
        Grid::new(points, half_width, t0, dt, steps)
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    pub fn nodes(&self) -> usize {
        self.points.pow(3)
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.points + j) * self.points + k
    }

    pub fn ijk(&self, node: usize) -> [usize; 3] {
        let n = self.points;
        [node / (n * n), (node / n) % n, node % n]
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.ijk(node).iter().any(|&i| i == 0 || i == self.points - 1)
    }

    pub fn interior(&self) -> Vec<usize> {
        (0..self.nodes()).filter(|&v| !self.is_boundary(v)).collect()
    }

    pub fn time(&self, level: usize) -> f64 {
        self.t0 + level as f64 * self.dt
    }

    pub fn point(&self, level: usize, node: usize) -> SpacetimePoint {
        let [i, j, k] = self.ijk(node);
        let x = |i: usize| -self.half_width + i as f64 * self.dx();
        [self.time(level), x(i), x(j), x(k)]
    }

    /// Index offset of one step along spatial axis 1..=3.
    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            1 => self.points * self.points,
            2 => self.points,
            _ => 1,
        }
    }
}

/// Closed-form sources: spatial current components J_1..J_3 and 𝓕.
pub trait Sources: Sync {
    fn current(&self, p: &SpacetimePoint) -> [Vec<f64>; 3];
    /// Σ_j ∂_jJ_j.
    fn divergence(&self, p: &SpacetimePoint) -> Vec<f64>;
    fn higgs(&self, p: &SpacetimePoint) -> Vec<C>;
    fn vanishes_at(&self, p: &SpacetimePoint) -> bool;
}

/// χ(t,x)·(J_j, 𝓕) with χ = b((t − c₀)/T)·b(|x − c|/R), b(u) = (1 − u²)ᵖ₊.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSource {
    pub center: SpacetimePoint,
    pub radius: f64,
    pub half_duration: f64,
    pub power: i32,
    pub current: [Vec<f64>; 3],
    pub higgs: Vec<C>,
}

impl BumpSource {
    fn parts(&self, p: &SpacetimePoint) -> (f64, f64) {
        let ut = ((p[0] - self.center[0]) / self.half_duration).powi(2);
        let ux: f64 = (1..4).map(|j| ((p[j] - self.center[j]) / self.radius).powi(2)).sum();
        (ut, ux)
    }

    pub fn chi(&self, p: &SpacetimePoint) -> f64 {
        let (ut, ux) = self.parts(p);
        if ut < 1.0 && ux < 1.0 {
            ((1.0 - ut) * (1.0 - ux)).powi(self.power)
        } else {
            0.0
        }
    }

    fn dchi(&self, p: &SpacetimePoint, j: usize) -> f64 {
        let (ut, ux) = self.parts(p);
        if ut < 1.0 && ux < 1.0 {
            let k = self.power;
            -(1.0 - ut).powi(k) * k as f64 * (1.0 - ux).powi(k - 1) * 2.0 * (p[j] - self.center[j]) / (self.radius * self.radius)
        } else {
            0.0
        }
    }

    pub fn scaled(&self, eps: f64) -> Self {
        let mut out = self.clone();
        out.current.iter_mut().flatten().for_each(|v| *v *= eps);
        out.higgs.iter_mut().for_each(|v| *v *= eps);
        out
    }
}

impl Sources for BumpSource {
    fn current(&self, p: &SpacetimePoint) -> [Vec<f64>; 3] {
        let c = self.chi(p);
        [0, 1, 2].map(|j| self.current[j].iter().map(|v| c * v).collect())
    }
    fn divergence(&self, p: &SpacetimePoint) -> Vec<f64> {
        let mut out = vec![0.0; self.current[0].len()];
        for j in 0..3 {
            let d = self.dchi(p, j + 1);
            for (o, v) in out.iter_mut().zip(&self.current[j]) {
                *o += d * v;
            }
        }
        out
    }
    fn higgs(&self, p: &SpacetimePoint) -> Vec<C> {
        let c = self.chi(p);
        self.higgs.iter().map(|v| v * c).collect()
    }
    fn vanishes_at(&self, p: &SpacetimePoint) -> bool {
        let (ut, ux) = self.parts(p);
        ut >= 1.0 || ux >= 1.0
    }
}

/// Σ_i ε_i S_i for algebra dimension `n` and representation dimension `d`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SourceSum {
    pub n: usize,
    pub d: usize,
    pub terms: Vec<(f64, BumpSource)>,
}

impl SourceSum {
    pub fn zero(n: usize, d: usize) -> Self {
        SourceSum { n, d, terms: Vec::new() }
    }

    pub fn single(eps: f64, s: BumpSource) -> Self {
        SourceSum { n: s.current[0].len(), d: s.higgs.len(), terms: vec![(eps, s)] }
    }
}

impl Sources for SourceSum {
    fn current(&self, p: &SpacetimePoint) -> [Vec<f64>; 3] {
        let n = self.n;
        let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for (e, s) in &self.terms {
            for (o, c) in out.iter_mut().zip(s.current(p)) {
                o.iter_mut().zip(c).for_each(|(o, c)| *o += e * c);
            }
        }
        out
    }
    fn divergence(&self, p: &SpacetimePoint) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (e, s) in &self.terms {
            out.iter_mut().zip(s.divergence(p)).for_each(|(o, c)| *o += e * c);
        }
        out
    }
    fn higgs(&self, p: &SpacetimePoint) -> Vec<C> {
        let mut out = vec![CZ; self.d];
        for (e, s) in &self.terms {
            out.iter_mut().zip(s.higgs(p)).for_each(|(o, c)| *o += c * e);
        }
        out
    }
    fn vanishes_at(&self, p: &SpacetimePoint) -> bool {
        self.terms.iter().all(|(e, s)| *e == 0.0 || s.vanishes_at(p))
    }
}

/// Grid histories of (W, Υ, J_0) at levels 0..=steps.
#[derive(Clone, Debug)]
pub struct Solution {
    pub grid: Grid,
    pub n: usize,
    pub d: usize,
    /// `w[level][node·4n + α·n + i]`
    pub w: Vec<Vec<f64>>,
    /// `y[level][node·d + r]`
    pub y: Vec<Vec<C>>,
    /// `j0[level][node·n + i]`
    pub j0: Vec<Vec<f64>>,
    pub picard_iterations: usize,
}

impl Solution {
    pub fn w_at(&self, level: usize, node: usize) -> Coords4 {
        let n = self.n;
        let s = &self.w[level][node * 4 * n..(node + 1) * 4 * n];
        [0, 1, 2, 3].map(|a| s[a * n..(a + 1) * n].to_vec())
    }

    pub fn y_at(&self, level: usize, node: usize) -> &[C] {
        &self.y[level][node * self.d..(node + 1) * self.d]
    }

    pub fn j0_at(&self, level: usize, node: usize) -> &[f64] {
        &self.j0[level][node * self.n..(node + 1) * self.n]
    }

    /// Jet at an interior node; time derivatives are central where both
    /// neighbours exist and one-sided at the ends.
    pub fn jet(&self, level: usize, node: usize) -> FieldJet {
        let last = self.w.len() - 1;
        let zw = vec![0.0; self.w[0].len()];
        let zy = vec![CZ; self.y[0].len()];
        let (wp, yp) = if level == 0 { (&zw, &zy) } else { (&self.w[level - 1], &self.y[level - 1]) };
        let (wn, yn, span) = if level < last {
            (&self.w[level + 1], &self.y[level + 1], 2.0)
        } else {
            (&self.w[level], &self.y[level], 1.0)
        };
        build_jet(&self.grid, self.n, self.d, node, &self.w[level], &self.y[level], (wp, yp), (wn, yn), span)
    }

    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for l in 0..self.w.len() {
            m = self.w[l].iter().chain(&self.j0[l]).fold(m, |a, v| a.max(v.abs()));
            m = self.y[l].iter().fold(m, |a, v| a.max(v.norm()));
        }
        m
    }

    /// Largest nodal magnitude of (W, Υ, J_0) at one level.
    pub fn node_magnitude(&self, level: usize, node: usize) -> f64 {
        let w = self.w[level][node * 4 * self.n..(node + 1) * 4 * self.n].iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let y = self.y_at(level, node).iter().fold(0.0f64, |a, v| a.max(v.norm()));
        let j = self.j0_at(level, node).iter().fold(0.0f64, |a, v| a.max(v.abs()));
        w.max(y).max(j)
    }

    /// Componentwise (W, Υ) differences (self − other)/scale as a flat vector.
    pub fn flat_difference(&self, other: &Solution, scale: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for l in 0..self.w.len() {
            out.extend(self.w[l].iter().zip(&other.w[l]).map(|(a, b)| (a - b) / scale));
            for (a, b) in self.y[l].iter().zip(&other.y[l]) {
                let z = (a - b) / scale;
                out.push(z.re);
                out.push(z.im);
            }
        }
        out
    }

    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in 0..self.w.len() {
            out.extend(self.w[l].iter());
            for z in &self.y[l] {
                out.push(z.re);
                out.push(z.im);
            }
        }
        out
    }

    /// Flat little-endian dump of one level: header (points, n, d as u64;
    /// t, Δt, Δx as f64), then W, Υ as (re, im) pairs, then J_0.
    pub fn write_snapshot<Wr: std::io::Write>(&self, level: usize, out: &mut Wr) -> std::io::Result<()> {
        let g = &self.grid;
        for v in [g.points as u64, self.n as u64, self.d as u64] {
            out.write_all(&v.to_le_bytes())?;
        }
        for v in [g.time(level), g.dt, g.dx()] {
            out.write_all(&v.to_le_bytes())?;
        }
        let ys = self.y[level].iter().flat_map(|z| [z.re, z.im]);
        for v in self.w[level].iter().copied().chain(ys).chain(self.j0[level].iter().copied()) {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

#[allow(clippy::too_many_arguments)]
fn build_jet(
    g: &Grid,
    n: usize,
    d: usize,
    node: usize,
    w: &[f64],
    y: &[C],
    prev: (&Vec<f64>, &Vec<C>),
    next: (&Vec<f64>, &Vec<C>),
    span: f64,
) -> FieldJet {
    let mut jet = FieldJet::zero(n, d);
    let wl = 4 * n;
    let (dx, dt) = (g.dx(), g.dt);
    for a in 0..4 {
        for i in 0..n {
            let k = node * wl + a * n + i;
            jet.w[a][i] = w[k];
            jet.dw[0][a][i] = (next.0[k] - prev.0[k]) / (span * dt);
            for ax in 1..4 {
                let s = g.stride(ax) * wl;
                jet.dw[ax][a][i] = (w[k + s] - w[k - s]) / (2.0 * dx);
            }
        }
    }
    for r in 0..d {
        let k = node * d + r;
        jet.y[r] = y[k];
        jet.dy[0][r] = (next.1[k] - prev.1[k]) / (span * dt);
        for ax in 1..4 {
            let s = g.stride(ax) * d;
            jet.dy[ax][r] = (y[k + s] - y[k - s]) / (2.0 * dx);
        }
    }
    jet
}

/// Per-node data handed to a model.
pub struct NodeCtx<'a> {
    pub level: usize,
    pub node: usize,
    pub p: SpacetimePoint,
    pub bg: &'a BackgroundJet,
    pub jet: &'a FieldJet,
    pub j0: &'a [f64],
}

/// A second-order-in-time system ∂_t²u = Δu + rhs(u) together with the
/// current ODE ∂_tJ_0 = −[c, J_0] + g.
pub trait Model: Sync {
    fn rhs(&self, ctx: &NodeCtx) -> (Coords4, Vec<C>);
    fn current_ode(&self, level: usize, node: usize, p: &SpacetimePoint, bg: &BackgroundJet, w: &Coords4, y: &[C]) -> (Vec<f64>, Vec<f64>);
    /// Nodes where a source is active at `level`; used for finite-speed checks.
    fn source_active(&self, p: &SpacetimePoint) -> bool;
}

fn add_current(out: &mut Coords4, j0: &[f64], spatial: &[Vec<f64>; 3]) {
    out[0].iter_mut().zip(j0).for_each(|(o, v)| *o += v);
    for j in 0..3 {
        out[j + 1].iter_mut().zip(&spatial[j]).for_each(|(o, v)| *o += v);
    }
}

fn neg(mut c: Coords4) -> Coords4 {
    c.iter_mut().flatten().for_each(|v| *v = -*v);
    c
}

/// The full perturbed system.
pub struct Perturbed<'a, S: ?Sized> {
    pub terms: Terms<'a>,
    pub sources: &'a S,
}

impl<'a, S: Sources + ?Sized> Model for Perturbed<'a, S> {
    fn rhs(&self, ctx: &NodeCtx) -> (Coords4, Vec<C>) {
        let mut w = neg(self.terms.ym_lower(ctx.bg, ctx.jet));
        add_current(&mut w, ctx.j0, &self.sources.current(&ctx.p));
        let mut y = self.terms.higgs_lower(ctx.bg, ctx.jet);
        y.iter_mut().zip(self.sources.higgs(&ctx.p)).for_each(|(o, f)| *o = f - *o);
        (w, y)
    }

    fn current_ode(&self, _l: usize, _n: usize, p: &SpacetimePoint, bg: &BackgroundJet, w: &Coords4, y: &[C]) -> (Vec<f64>, Vec<f64>) {
        let s = self.terms.rep.structure();
        let c: Vec<f64> = bg.a[0].iter().zip(&w[0]).map(|(a, b)| a + b).collect();
        let mut g = self.sources.divergence(p);
        let cur = self.sources.current(p);
        for j in 0..3 {
            let v: Vec<f64> = bg.a[j + 1].iter().zip(&w[j + 1]).map(|(a, b)| a + b).collect();
            s.bracket_acc(&v, &cur[j], 1.0, &mut g);
        }
        let psi: Vec<C> = bg.phi.iter().zip(y).map(|(a, b)| a + b).collect();
        self.terms.rep.j_acc(&self.sources.higgs(p), &psi, 1.0, &mut g);
        (c, g)
    }

    fn source_active(&self, p: &SpacetimePoint) -> bool {
        !self.sources.vanishes_at(p)
    }
}

/// How the Higgs equation couples to the connection perturbation at linear
/// order: `GaugeReduced` uses 2⋆(ρ_*(W) ∧ ⋆d_AΦ), valid when D_A^*W = 0;
/// `Exact` keeps d_A^*(ρ_*(W)Φ) + ⋆(ρ_*(W) ∧ ⋆d_AΦ).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HiggsCoupling {
    GaugeReduced,
    Exact,
}

impl<'a> Terms<'a> {
    fn higgs_linear_with(&self, bg: &BackgroundJet, jet: &FieldJet, c: HiggsCoupling) -> Vec<C> {
        match c {
            HiggsCoupling::GaugeReduced => self.higgs_linear(bg, jet),
            HiggsCoupling::Exact => self.higgs_linear_exact(bg, jet),
        }
    }
}

/// The system linearized at (A, Φ).
pub struct Linearized<'a, S: ?Sized> {
    pub terms: Terms<'a>,
    pub sources: &'a S,
    pub coupling: HiggsCoupling,
}

impl<'a, S: Sources + ?Sized> Model for Linearized<'a, S> {
    fn rhs(&self, ctx: &NodeCtx) -> (Coords4, Vec<C>) {
        let mut w = neg(self.terms.ym_linear(ctx.bg, ctx.jet));
        add_current(&mut w, ctx.j0, &self.sources.current(&ctx.p));
        let mut y = self.terms.higgs_linear_with(ctx.bg, ctx.jet, self.coupling);
        y.iter_mut().zip(self.sources.higgs(&ctx.p)).for_each(|(o, f)| *o = f - *o);
        (w, y)
    }

    fn current_ode(&self, _l: usize, _n: usize, p: &SpacetimePoint, bg: &BackgroundJet, _w: &Coords4, _y: &[C]) -> (Vec<f64>, Vec<f64>) {
        let s = self.terms.rep.structure();
        let mut g = self.sources.divergence(p);
        let cur = self.sources.current(p);
        for j in 0..3 {
            s.bracket_acc(&bg.a[j + 1], &cur[j], 1.0, &mut g);
        }
        self.terms.rep.j_acc(&self.sources.higgs(p), &bg.phi, 1.0, &mut g);
        (bg.a[0].clone(), g)
    }

    fn source_active(&self, p: &SpacetimePoint) -> bool {
        !self.sources.vanishes_at(p)
    }
}

/// Mixed second ε-derivative (W_(kl), Υ_(kl)) over a flat background, driven
/// by two first-order solutions and their sources.
pub struct SecondOrder<'a, S: ?Sized> {
    pub terms: Terms<'a>,
    pub first: [&'a Solution; 2],
    pub sources: [&'a S; 2],
    pub coupling: HiggsCoupling,
}

impl<'a, S: Sources + ?Sized> Model for SecondOrder<'a, S> {
    fn rhs(&self, ctx: &NodeCtx) -> (Coords4, Vec<C>) {
        let jk = self.first[0].jet(ctx.level, ctx.node);
        let jl = self.first[1].jet(ctx.level, ctx.node);
        let mut w = neg(self.terms.ym_linear(ctx.bg, ctx.jet));
        w[0].iter_mut().zip(ctx.j0).for_each(|(o, v)| *o += v);
        let pw = self.terms.pair_ym(ctx.bg, &jk, &jl);
        w.iter_mut().flatten().zip(pw.iter().flatten()).for_each(|(o, v)| *o += v);
        let mut y = self.terms.higgs_linear_with(ctx.bg, ctx.jet, self.coupling);
        let exact = self.coupling == HiggsCoupling::Exact;
        y.iter_mut().zip(self.terms.pair_higgs(ctx.bg, &jk, &jl, exact)).for_each(|(o, f)| *o = f - *o);
        (w, y)
    }

    fn current_ode(&self, level: usize, node: usize, p: &SpacetimePoint, bg: &BackgroundJet, _w: &Coords4, _y: &[C]) -> (Vec<f64>, Vec<f64>) {
        let s = self.terms.rep.structure();
        let mut g = vec![0.0; s.dim()];
        for (u, v) in [(0, 1), (1, 0)] {
            let wu = self.first[u].w_at(level, node);
            s.bracket_acc(&wu[0], self.first[v].j0_at(level, node), -1.0, &mut g);
            let cur = self.sources[v].current(p);
            for j in 0..3 {
                s.bracket_acc(&wu[j + 1], &cur[j], 1.0, &mut g);
            }
            self.terms.rep.j_acc(&self.sources[u].higgs(p), self.first[v].y_at(level, node), 1.0, &mut g);
        }
        (bg.a[0].clone(), g)
    }

    fn source_active(&self, p: &SpacetimePoint) -> bool {
        self.sources.iter().any(|s| !s.vanishes_at(p))
    }
}

/// Background jets at every node of one level (boundary nodes included).
pub fn background_level<A, P>(grid: &Grid, a: &A, phi: &P, rep: &Representation, level: usize) -> Vec<BackgroundJet>
where
    A: ConnectionField + ?Sized,
    P: HiggsField + ?Sized,
{
    (0..grid.nodes())
        .into_par_iter()
        .map(|v| BackgroundJet::sample(a, phi, rep, &grid.point(level, v), BACKGROUND_FD_STEP))
        .collect()
}

pub struct Solver<'a, A: ?Sized, P: ?Sized> {
    pub grid: Grid,
    pub a: &'a A,
    pub phi: &'a P,
    pub rep: &'a Representation,
    pub picard_tol: f64,
    cache: Option<Vec<Vec<BackgroundJet>>>,
}

impl<'a, A: ConnectionField + ?Sized, P: HiggsField + ?Sized> Solver<'a, A, P> {
    pub fn new(grid: Grid, a: &'a A, phi: &'a P, rep: &'a Representation) -> Self {
        Solver { grid, a, phi, rep, picard_tol: PICARD_TOL, cache: None }
    }

    /// Samples the background at every level once, for repeated solves.
    pub fn with_cached_background(mut self) -> Self {
        let g = &self.grid;
        self.cache = Some((0..=g.steps).map(|l| background_level(g, self.a, self.phi, self.rep, l)).collect());
        self
    }

    fn background(&self, level: usize) -> Cow<'_, [BackgroundJet]> {
        match &self.cache {
            Some(c) => Cow::Borrowed(&c[level]),
            None => Cow::Owned(background_level(&self.grid, self.a, self.phi, self.rep, level)),
        }
    }

    pub fn perturbed<S: Sources + ?Sized>(&self, sources: &S) -> Result<Solution> {
        self.evolve(&Perturbed { terms: Terms::new(self.rep), sources })
    }

    pub fn linearized<S: Sources + ?Sized>(&self, sources: &S) -> Result<Solution> {
        self.linearized_with(sources, HiggsCoupling::GaugeReduced)
    }

    pub fn linearized_with<S: Sources + ?Sized>(&self, sources: &S, coupling: HiggsCoupling) -> Result<Solution> {
        self.evolve(&Linearized { terms: Terms::new(self.rep), sources, coupling })
    }

    /// Requires A = 0.
    pub fn second_order<S: Sources + ?Sized>(&self, first: [&Solution; 2], sources: [&S; 2], coupling: HiggsCoupling) -> Result<Solution> {
        let probe = self.a.coords(&self.grid.point(0, 0));
        if probe.iter().flatten().any(|v| *v != 0.0) {
            return Err(LabError::Config("the second-order system is set up over A = 0".into()));
        }
        self.evolve(&SecondOrder { terms: Terms::new(self.rep), first, sources, coupling })
    }

    pub fn evolve<M: Model>(&self, model: &M) -> Result<Solution> {
        let g = &self.grid;
        let n = self.rep.structure().dim();
        let d = self.rep.dim();
        let wl = 4 * n;
        let nodes = g.nodes();
        let interior = g.interior();
        let mut sol = Solution {
            grid: g.clone(),
            n,
            d,
            w: vec![vec![0.0; nodes * wl]; g.steps + 1],
            y: vec![vec![CZ; nodes * d]; g.steps + 1],
            j0: vec![vec![0.0; nodes * n]; g.steps + 1],
            picard_iterations: 0,
        };
        let zero_w = vec![0.0; nodes * wl];
        let zero_y = vec![CZ; nodes * d];
        let (dt, dx) = (g.dt, g.dx());
        let mut bg_cur = self.background(0);
        // J_0 at level 0 from the ODE started at rest (sources vanish before t₀).
        for lev in 0..g.steps {
            let (prev_w, prev_y) = if lev == 0 { (&zero_w, &zero_y) } else { (&sol.w[lev - 1], &sol.y[lev - 1]) };
            let (cur_w, cur_y) = (&sol.w[lev], &sol.y[lev]);
            // quadratic extrapolation as the first Picard iterate
            let (pp_w, pp_y) = if lev < 2 { (&zero_w, &zero_y) } else { (&sol.w[lev - 2], &sol.y[lev - 2]) };
            let mut gw: Vec<f64> = (0..cur_w.len()).map(|k| 3.0 * (cur_w[k] - prev_w[k]) + pp_w[k]).collect();
            let mut gy: Vec<C> = (0..cur_y.len()).map(|k| (cur_y[k] - prev_y[k]) * 3.0 + pp_y[k]).collect();
            let j0 = &sol.j0[lev];
            let mut iters = 0;
            loop {
                iters += 1;
                let updates: Vec<(Vec<f64>, Vec<C>)> = interior
                    .par_iter()
                    .map(|&v| {
                        let jet = build_jet(g, n, d, v, cur_w, cur_y, (prev_w, prev_y), (&gw, &gy), 2.0);
                        let ctx = NodeCtx {
                            level: lev,
                            node: v,
                            p: g.point(lev, v),
                            bg: &bg_cur[v],
                            jet: &jet,
                            j0: &j0[v * n..(v + 1) * n],
                        };
                        let (rw, ry) = model.rhs(&ctx);
                        let mut nw = vec![0.0; wl];
                        for a in 0..4 {
                            for i in 0..n {
                                let k = v * wl + a * n + i;
                                let mut lap = 0.0;
                                for ax in 1..4 {
                                    let s = g.stride(ax) * wl;
                                    lap += cur_w[k + s] - 2.0 * cur_w[k] + cur_w[k - s];
                                }
                                nw[a * n + i] = 2.0 * cur_w[k] - prev_w[k] + dt * dt * (lap / (dx * dx) + rw[a][i]);
                            }
                        }
                        let mut ny = vec![CZ; d];
                        for r in 0..d {
                            let k = v * d + r;
                            let mut lap = CZ;
                            for ax in 1..4 {
                                let s = g.stride(ax) * d;
                                lap += cur_y[k + s] - 2.0 * cur_y[k] + cur_y[k - s];
                            }
                            ny[r] = 2.0 * cur_y[k] - prev_y[k] + (lap / (dx * dx) + ry[r]) * (dt * dt);
                        }
                        (nw, ny)
                    })
                    .collect();
                let mut change: f64 = 0.0;
                for (&v, (nw, ny)) in interior.iter().zip(updates) {
                    for (o, x) in gw[v * wl..(v + 1) * wl].iter_mut().zip(nw) {
                        change = change.max((*o - x).abs());
                        *o = x;
                    }
                    for (o, x) in gy[v * d..(v + 1) * d].iter_mut().zip(ny) {
                        change = change.max((*o - x).norm());
                        *o = x;
                    }
                }
                if !change.is_finite() {
                    return Err(LabError::FixedPointDivergence { step: lev, residual: change });
                }
                if change <= self.picard_tol {
                    break;
                }
                if iters >= MAX_PICARD {
                    return Err(LabError::FixedPointDivergence { step: lev, residual: change });
                }
            }
            sol.picard_iterations = sol.picard_iterations.max(iters);
            sol.w[lev + 1] = gw;
            sol.y[lev + 1] = gy;

            let bg_next = self.background(lev + 1);
            let s = self.rep.structure();
            let next_j0: Vec<Vec<f64>> = interior
                .par_iter()
                .map(|&v| {
                    let (c0, g0) = model.current_ode(lev, v, &g.point(lev, v), &bg_cur[v], &sol.w_at(lev, v), sol.y_at(lev, v));
                    let (c1, g1) = model.current_ode(lev + 1, v, &g.point(lev + 1, v), &bg_next[v], &sol.w_at(lev + 1, v), sol.y_at(lev + 1, v));
                    let j = sol.j0_at(lev, v);
                    let mut f0 = g0;
                    s.bracket_acc(&c0, j, -1.0, &mut f0);
                    let rhs = DVector::from_iterator(n, (0..n).map(|i| j[i] + 0.5 * dt * (f0[i] + g1[i])));
                    let m = DMatrix::identity(n, n) + s.ad_matrix(&c1) * (0.5 * dt);
                    m.lu().solve(&rhs).map(|x| x.iter().cloned().collect()).unwrap_or_else(|| vec![f64::NAN; n])
                })
                .collect();
            for (&v, x) in interior.iter().zip(next_j0) {
                sol.j0[lev + 1][v * n..(v + 1) * n].copy_from_slice(&x);
            }
            bg_cur = bg_next;
        }
        Ok(sol)
    }

    /// Discrete compatibility residual (∂_tJ_0 central in time) at interior
    /// nodes of interior levels: returns (RMS, max).
    pub fn compatibility_residual<S: Sources + ?Sized>(&self, sol: &Solution, sources: &S) -> (f64, f64) {
        let model = Perturbed { terms: Terms::new(self.rep), sources };
        let g = &self.grid;
        let s = self.rep.structure();
        let interior = g.interior();
        let mut all = Vec::new();
        for lev in 1..g.steps {
            let bg = self.background(lev);
            let r: Vec<f64> = interior
                .par_iter()
                .flat_map_iter(|&v| {
                    let (c, mut f) = model.current_ode(lev, v, &g.point(lev, v), &bg[v], &sol.w_at(lev, v), sol.y_at(lev, v));
                    s.bracket_acc(&c, sol.j0_at(lev, v), -1.0, &mut f);
                    let (a, b) = (sol.j0_at(lev + 1, v), sol.j0_at(lev - 1, v));
                    (0..sol.n).map(move |i| (a[i] - b[i]) / (2.0 * g.dt) - f[i]).collect::<Vec<_>>()
                })
                .collect();
            all.extend(r);
        }
        let max = all.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (crate::fit::rms(&all), max)
    }
}

/// Largest nodal magnitude outside the numerical domain of influence of the
/// source support: one node per step along each axis (L¹ dilation).
pub fn outside_cone_max<M: Model>(sol: &Solution, model: &M) -> f64 {
    let g = &sol.grid;
    let nodes = g.nodes();
    let mut reach = vec![false; nodes];
    let mut worst: f64 = 0.0;
    for lev in 0..=g.steps {
        if lev > 0 {
            let old = reach.clone();
            for v in 0..nodes {
                if old[v] {
                    continue;
                }
                let [i, j, k] = g.ijk(v);
                let hit = [(i, 1), (j, 2), (k, 3)].iter().any(|&(c, ax)| {
                    let s = g.stride(ax);
                    (c > 0 && old[v - s]) || (c + 1 < g.points && old[v + s])
                });
                reach[v] = hit;
            }
        }
        for v in 0..nodes {
            if model.source_active(&g.point(lev, v)) {
                reach[v] = true;
            }
        }
        for v in 0..nodes {
            if !reach[v] {
                worst = worst.max(sol.node_magnitude(lev, v));
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{CVec, GroupSpec, RepSpec};
    use crate::fields::ConstantConnection;

    fn bump(n: usize, d: usize) -> BumpSource {
        BumpSource {
            center: [0.1, 0.0, 0.0, 0.0],
            radius: 0.15,
            half_duration: 0.1,
            power: 6,
            current: [vec![0.3; n], vec![-0.2; n], vec![0.1; n]],
            higgs: vec![C::new(0.2, -0.1); d],
        }
    }

    #[test]
    fn cfl_is_enforced() {
        assert!(matches!(Grid::new(9, 0.25, 0.0, 0.05, 4), Err(LabError::CflViolation { .. })));
        assert!(Grid::new(9, 0.25, 0.0, 1.0 / 32.0, 4).is_ok());
    }

    #[test]
    fn zero_source_stays_zero() {
        let g = GroupSpec::electroweak();
        let rep = Representation::new(&g, RepSpec::Electroweak { n_y: 3 }).unwrap();
        let a = ConstantConnection::zero(&g);
        let phi = crate::fields::ConstantHiggs(CVec::from_vec(vec![C::new(1.0, 0.0), CZ]));
        let grid = Grid::with_spacing(1.0 / 8.0, 0.25, 0.0, 0.25, 0.5).unwrap();
        let solver = Solver::new(grid, &a, &phi, &rep);
        let sol = solver.perturbed(&SourceSum::zero(4, 2)).unwrap();
        assert_eq!(sol.max_abs(), 0.0);
    }

    #[test]
    fn bump_divergence_matches_fd() {
        let b = bump(2, 1);
        let p = [0.12, 0.05, -0.03, 0.02];
        let h = 1e-5;
        let mut fd = 0.0;
        for j in 1..4 {
            let (mut a, mut c) = (p, p);
            a[j] += h;
            c[j] -= h;
            fd += (b.current(&a)[j - 1][0] - b.current(&c)[j - 1][0]) / (2.0 * h);
        }
        assert!((fd - b.divergence(&p)[0]).abs() < 1e-6);
    }
}
