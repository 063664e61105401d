//! Minkowski geometry: the causal diamond, light rays, the Hodge star on
//! R^{1+3}, and the covector configuration used by the threefold
//! interaction calculus.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub type SpacetimePoint = [f64; 4];
pub type Covector = [f64; 4];

pub const DEFAULT_EPS0: f64 = 0.25;

/// −a₀b₀ + a₁b₁ + a₂b₂ + a₃b₃.
pub fn pairing(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

/// Index raising/lowering with diag(−1, 1, 1, 1).
pub fn flip(v: &[f64; 4]) -> [f64; 4] {
    [-v[0], v[1], v[2], v[3]]
}

pub fn add(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

pub fn sub(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

pub fn scale(s: f64, a: &[f64; 4]) -> [f64; 4] {
    [s * a[0], s * a[1], s * a[2], s * a[3]]
}

pub fn spatial_norm(p: &SpacetimePoint) -> f64 {
    (p[1] * p[1] + p[2] * p[2] + p[3] * p[3]).sqrt()
}

pub fn is_lightlike(v: &[f64; 4], tol: f64) -> bool {
    let n = v.iter().map(|c| c * c).sum::<f64>();
    n > 0.0 && pairing(v, v).abs() <= tol * n
}

/// Closed diamond |x| ≤ min(t + 1, 1 − t).
pub fn in_diamond(p: &SpacetimePoint) -> bool {
    spatial_norm(p) <= (p[0] + 1.0).min(1.0 - p[0])
}

pub fn in_diamond_interior(p: &SpacetimePoint) -> bool {
    spatial_norm(p) < (p[0] + 1.0).min(1.0 - p[0])
}

/// The small observation set: interior of the diamond with |x| < ε₀.
pub fn in_observation_set(p: &SpacetimePoint, eps0: f64) -> bool {
    in_diamond_interior(p) && spatial_norm(p) < eps0
}

/// b lies in the causal future of a (b − a future-pointing, non-spacelike).
pub fn causally_precedes(a: &SpacetimePoint, b: &SpacetimePoint, tol: f64) -> bool {
    let d = sub(b, a);
    d[0] > 0.0 && pairing(&d, &d) <= tol
}

/// Differential form on R^{1+3} with coefficients on dx^I, I increasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Form {
    pub degree: usize,
    pub coeffs: Vec<f64>,
}

pub fn multi_indices(k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..4 {
            cur.push(i);
            rec(i + 1, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, k, &mut Vec::new(), &mut out);
    out
}

fn perm_sign(seq: &[usize]) -> f64 {
    let mut s = 1.0;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                s = -s;
            } else if seq[i] == seq[j] {
                return 0.0;
            }
        }
    }
    s
}

fn metric_sign(idx: &[usize]) -> f64 {
    if idx.contains(&0) {
        -1.0
    } else {
        1.0
    }
}

impl Form {
    pub fn zero(degree: usize) -> Result<Self> {
        if degree > 4 {
            return Err(LabError::DegenerateGeometry(format!("no {degree}-forms in 4 dimensions")));
        }
        Ok(Form {
            degree,
            coeffs: vec![0.0; multi_indices(degree).len()],
        })
    }

    pub fn new(degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        let f = Self::zero(degree)?;
        if coeffs.len() != f.coeffs.len() {
            return Err(LabError::DegenerateGeometry(format!(
                "a {degree}-form has {} coefficients, got {}",
                f.coeffs.len(),
                coeffs.len()
            )));
        }
        Ok(Form { degree, coeffs })
    }

    pub fn volume() -> Self {
        Form { degree: 4, coeffs: vec![1.0] }
    }

    /// Fixed by α ∧ ⋆β = ⟨α, β⟩ dt∧dx¹∧dx²∧dx³.
    pub fn hodge_star(&self) -> Form {
        let k = self.degree;
        let src = multi_indices(k);
        let dst = multi_indices(4 - k);
        let mut out = vec![0.0; dst.len()];
        for (i, idx) in src.iter().enumerate() {
            let comp: Vec<usize> = (0..4).filter(|j| !idx.contains(j)).collect();
            let mut cat = idx.clone();
            cat.extend(&comp);
            let j = dst.iter().position(|d| *d == comp).expect("complement exists");
            out[j] += self.coeffs[i] * metric_sign(idx) * perm_sign(&cat);
        }
        Form { degree: 4 - k, coeffs: out }
    }

    pub fn wedge(&self, other: &Form) -> Result<Form> {
        let k = self.degree + other.degree;
        let mut out = Form::zero(k)?;
        let a_idx = multi_indices(self.degree);
        let b_idx = multi_indices(other.degree);
        let dst = multi_indices(k);
        for (i, ia) in a_idx.iter().enumerate() {
            for (j, ib) in b_idx.iter().enumerate() {
                let mut cat = ia.clone();
                cat.extend(ib);
                let s = perm_sign(&cat);
                if s == 0.0 {
                    continue;
                }
                let mut sorted = cat.clone();
                sorted.sort_unstable();
                let d = dst.iter().position(|x| *x == sorted).expect("sorted index");
                out.coeffs[d] += s * self.coeffs[i] * other.coeffs[j];
            }
        }
        Ok(out)
    }

    /// Induced Minkowski inner product.
    pub fn inner(&self, other: &Form) -> Result<f64> {
        if self.degree != other.degree {
            return Err(LabError::DegenerateGeometry("degrees differ".into()));
        }
        Ok(multi_indices(self.degree)
            .iter()
            .enumerate()
            .map(|(i, idx)| metric_sign(idx) * self.coeffs[i] * other.coeffs[i])
            .sum())
    }
}

/// a(r) = √(1 − r²).
pub fn a_of(r: f64) -> f64 {
    (1.0 - r * r).sqrt()
}

pub fn xi1() -> Covector {
    [1.0, 1.0, 0.0, 0.0]
}

pub fn xi2(s: f64) -> Covector {
    [1.0, a_of(s), s, 0.0]
}

pub fn xi3(s: f64) -> Covector {
    [1.0, a_of(s), -s, 0.0]
}

pub fn eta(r: f64) -> Covector {
    [1.0, -a_of(r), r, 0.0]
}

pub fn omega2(s: f64) -> Covector {
    [s, 0.0, 1.0, 0.0]
}

pub fn omega3(s: f64) -> Covector {
    [-s, 0.0, 1.0, 0.0]
}

fn check_rs(r: f64, s: f64) -> Result<()> {
    if !(r.is_finite() && s.is_finite()) || r.abs() >= 1.0 || s <= 0.0 || s >= 1.0 {
        return Err(LabError::DegenerateGeometry(format!(
            "need |r| < 1 and 0 < s < 1, got r = {r}, s = {s}"
        )));
    }
    Ok(())
}

/// κ in closed form.
pub fn kappa_closed(r: f64, s: f64) -> Result<[f64; 3]> {
    check_rs(r, s)?;
    let (ar, as_) = (a_of(r), a_of(s));
    let q = (1.0 + ar) / (1.0 - as_);
    Ok([1.0 - q, 0.5 * q + r / (2.0 * s), 0.5 * q - r / (2.0 * s)])
}

/// κ from the linear system κ₁ξ₁ + κ₂ξ₂ + κ₃ξ₃ = η (t, x¹, x² components).
pub fn kappa_solve(r: f64, s: f64) -> Result<[f64; 3]> {
    check_rs(r, s)?;
    let cols = [xi1(), xi2(s), xi3(s)];
    let m = Matrix3::from_fn(|i, j| cols[j][i]);
    let e = eta(r);
    let rhs = Vector3::new(e[0], e[1], e[2]);
    let lu = m.lu();
    let k = lu
        .solve(&rhs)
        .ok_or_else(|| LabError::DegenerateGeometry("singular covector system".into()))?;
    Ok([k[0], k[1], k[2]])
}

/// σ[□](ζ) = ⟨ζ, ζ⟩, the principal symbol of −∂^α∂_α.
pub fn box_symbol(z: &Covector) -> f64 {
    pairing(z, z)
}

pub fn box_symbol_inv(z: &Covector) -> Result<f64> {
    let q = box_symbol(z);
    if q.abs() < 1e-14 * z.iter().map(|c| c * c).sum::<f64>().max(1e-300) {
        return Err(LabError::DegenerateGeometry("symbol vanishes on a characteristic covector".into()));
    }
    Ok(1.0 / q)
}

/// Closed form σ[□]⁻¹(η_(1k)) = 1/(2(a(r) + a(s))κ_k), k ∈ {2, 3}.
pub fn box_symbol_inv_closed(r: f64, s: f64, k: usize) -> Result<f64> {
    let kap = kappa_closed(r, s)?;
    let kk = kap[k - 1];
    if kk == 0.0 {
        return Err(LabError::DegenerateGeometry(format!("κ_{k} vanishes")));
    }
    Ok(1.0 / (2.0 * (a_of(r) + a_of(s)) * kk))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InteractionGeometry {
    pub r: f64,
    pub s: f64,
    pub eps0: f64,
    pub xi: [Covector; 3],
    pub eta: Covector,
    pub kappa: [f64; 3],
    /// κ_kξ_k for k = 1, 2, 3.
    pub eta_k: [Covector; 3],
    pub eta12: Covector,
    pub eta13: Covector,
    pub eta23: Covector,
    pub omega2: Covector,
    pub omega3: Covector,
    pub x: [SpacetimePoint; 3],
    pub y: SpacetimePoint,
    pub z: SpacetimePoint,
}

impl InteractionGeometry {
    pub fn build(r: f64, s: f64, eps0: f64) -> Result<Self> {
        check_rs(r, s)?;
        if !(eps0 > 0.0 && eps0 < 1.0) {
            return Err(LabError::DegenerateGeometry(format!("ε₀ = {eps0} outside (0, 1)")));
        }
        let kappa = kappa_solve(r, s)?;
        let xi = [xi1(), xi2(s), xi3(s)];
        let eta_k = [
            scale(kappa[0], &xi[0]),
            scale(kappa[1], &xi[1]),
            scale(kappa[2], &xi[2]),
        ];
        let eta12 = add(&eta_k[0], &eta_k[1]);
        let eta13 = add(&eta_k[0], &eta_k[2]);
        let eta23 = add(&eta_k[1], &eta_k[2]);
        for (name, z) in [("η_(12)", &eta12), ("η_(13)", &eta13)] {
            box_symbol_inv(z).map_err(|_| LabError::DegenerateGeometry(format!("{name} is characteristic")))?;
        }
        let (x, y, z) = place_points(r, s, eps0)?;
        Ok(InteractionGeometry {
            r,
            s,
            eps0,
            xi,
            eta: eta(r),
            kappa,
            eta_k,
            eta12,
            eta13,
            eta23,
            omega2: omega2(s),
            omega3: omega3(s),
            x,
            y,
            z,
        })
    }

    /// Lightlike legs, ordering x < y < z, x, z observed and y not.
    pub fn validate(&self, tol: f64) -> bool {
        let obs = |p: &SpacetimePoint| in_observation_set(p, self.eps0);
        let legs_ok = self.x.iter().all(|xk| {
            let d = sub(&self.y, xk);
            pairing(&d, &d).abs() <= tol && d[0] > 0.0 && obs(xk)
        });
        let dz = sub(&self.z, &self.y);
        legs_ok
            && pairing(&dz, &dz).abs() <= tol
            && dz[0] > 0.0
            && obs(&self.z)
            && !obs(&self.y)
            && in_diamond(&self.y)
    }
}

/// x₁ sits on the t-axis; y is the midpoint of the part of the ray from x₁
/// along ξ₁ that is inside the diamond but outside the observation set; z is
/// the point of the η-ray from y closest to the t-axis. The time of x₁ is
/// chosen on a fixed grid to maximise the smallest constraint slack.
fn place_points(r: f64, s: f64, eps0: f64) -> Result<([SpacetimePoint; 3], SpacetimePoint, SpacetimePoint)> {
    let ar = a_of(r);
    let build = |tx: f64| {
        let x1 = [tx, 0.0, 0.0, 0.0];
        let lam = 0.5 * (eps0 + 0.5 * (1.0 - tx));
        let y = add(&x1, &scale(lam, &[1.0, -1.0, 0.0, 0.0]));
        let x2 = add(&y, &scale(lam, &flip(&xi2(s))));
        let x3 = add(&y, &scale(lam, &flip(&xi3(s))));
        let mu = lam * ar;
        let z = add(&y, &scale(mu, &[1.0, ar, -r, 0.0]));
        ([x1, x2, x3], y, z)
    };
    let slack = |p: &SpacetimePoint| {
        let n = spatial_norm(p);
        (eps0 - n).min(p[0] + 1.0 - n).min(1.0 - p[0] - n)
    };
    let mut best: Option<(f64, f64)> = None;
    let steps = 400;
    for i in 1..steps {
        let tx = -1.0 + 2.0 * i as f64 / steps as f64;
        let (xs, y, z) = build(tx);
        let ny = spatial_norm(&y);
        let mut m = (ny - eps0).min((y[0] + 1.0).min(1.0 - y[0]) - ny);
        for xk in &xs {
            m = m.min(slack(xk));
        }
        m = m.min(slack(&z));
        if best.map_or(true, |(_, bm)| m > bm) {
            best = Some((tx, m));
        }
    }
    match best {
        Some((tx, m)) if m > 0.0 => Ok(build(tx)),
        _ => Err(LabError::NoValidPlacement(format!(
            "no broken triple for r = {r}, s = {s}, ε₀ = {eps0}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_spot_values() {
        let k = kappa_closed(0.0, 0.6).unwrap();
        assert!((k[0] + 9.0).abs() < 1e-12 && (k[1] - 5.0).abs() < 1e-12 && (k[2] - 5.0).abs() < 1e-12);
        let ks = kappa_solve(0.0, 0.6).unwrap();
        for i in 0..3 {
            assert!((k[i] - ks[i]).abs() < 1e-12);
        }
        let e12 = add(&scale(k[0], &xi1()), &scale(k[1], &xi2(0.6)));
        assert!(sub(&e12, &[-4.0, -5.0, 3.0, 0.0]).iter().all(|c| c.abs() < 1e-12));
        assert!((box_symbol_inv(&e12).unwrap() - 1.0 / 18.0).abs() < 1e-14);
        assert!((box_symbol_inv_closed(0.0, 0.6, 2).unwrap() - 1.0 / 18.0).abs() < 1e-14);
    }

    #[test]
    fn omega_pairings() {
        let s = 0.37;
        assert!((pairing(&xi1(), &omega2(s)) + s).abs() < 1e-15);
        assert!((pairing(&xi1(), &omega3(s)) - s).abs() < 1e-15);
        assert!((pairing(&xi2(s), &omega3(s)) - 2.0 * s).abs() < 1e-15);
        assert!((pairing(&xi3(s), &omega2(s)) + 2.0 * s).abs() < 1e-15);
        assert!((pairing(&omega2(s), &omega3(s)) - (1.0 + s * s)).abs() < 1e-15);
        assert!(pairing(&xi2(s), &omega2(s)).abs() < 1e-15);
    }

    #[test]
    fn double_star_signs() {
        for k in 0..=4 {
            let n = multi_indices(k).len();
            let f = Form::new(k, (0..n).map(|i| 1.0 + i as f64 * 0.5).collect()).unwrap();
            let ss = f.hodge_star().hodge_star();
            let sign = if (k * (4 - k)) % 2 == 0 { -1.0 } else { 1.0 };
            for (a, b) in ss.coeffs.iter().zip(&f.coeffs) {
                assert!((a - sign * b).abs() < 1e-14, "k = {k}");
            }
        }
        assert_eq!(Form::new(0, vec![1.0]).unwrap().hodge_star(), Form::volume());
    }

    #[test]
    fn star_defining_identity() {
        let a = Form::new(2, vec![0.3, -1.0, 2.0, 0.7, 0.1, -0.4]).unwrap();
        let b = Form::new(2, vec![1.1, 0.2, -0.3, 0.5, 0.9, 1.3]).unwrap();
        let lhs = a.wedge(&b.hodge_star()).unwrap();
        assert!((lhs.coeffs[0] - a.inner(&b).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn geometry_is_valid_at_reference_point() {
        let g = InteractionGeometry::build(0.0, 0.6, DEFAULT_EPS0).unwrap();
        assert!(g.validate(1e-12));
        let g = InteractionGeometry::build(0.3, 0.1, DEFAULT_EPS0).unwrap();
        assert!(g.validate(1e-12));
        assert!(InteractionGeometry::build(0.0, 0.99, DEFAULT_EPS0).is_err());
        assert!(kappa_closed(1.0, 0.5).is_err());
    }
}
