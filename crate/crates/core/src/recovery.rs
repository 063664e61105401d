//! Synthetic inverse-problem runs: generate coupled transports from a hidden
//! (A, Φ), recover Φ along fans of light rays into a fixed z, and score the
//! result against the hidden field.
//!
//! A is handed to the recoverer (recovering it from 𝐒 is out of scope); the
//! reconstruction itself only reads the transport data.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{CMat, CVec, GroupSpec, ModelSpec, RepSpec, Representation};
use crate::error::{LabError, Result};
use crate::fields::{ConnectionField, ConnectionSpec, HiggsField, HiggsSpec};
use crate::geometry::{in_diamond_interior, in_observation_set, SpacetimePoint};
use crate::transport::{broken_transform, coupled_transport, reconstruct_higgs, BlockTransport, LightRay};

/// Lightlike lines through z, one per spatial direction; each is sampled at
/// the starting times t_start + k·h, k < count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FanSpec {
    pub z: SpacetimePoint,
    pub directions: Vec<[f64; 3]>,
    pub t_start: f64,
    pub count: usize,
    pub h: f64,
}

impl FanSpec {
    /// Rays of one line, ending at z and travelling towards the future.
    pub fn line(&self, dir: &[f64; 3]) -> Result<Vec<LightRay>> {
        let norm = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(LabError::DegenerateGeometry("zero fan direction".into()));
        }
        let v = [1.0, dir[0] / norm, dir[1] / norm, dir[2] / norm];
        // parameter = time coordinate
        let base = [0.0, self.z[1] - self.z[0] * v[1], self.z[2] - self.z[0] * v[2], self.z[3] - self.z[0] * v[3]];
        (0..self.count)
            .map(|k| {
                let t = self.t_start + k as f64 * self.h;
                if t >= self.z[0] {
                    return Err(LabError::DegenerateGeometry(format!("start time {t} is not before z")));
                }
                LightRay::new(base, v, t, self.z[0])
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub model: ModelSpec,
    pub connection: ConnectionSpec,
    pub higgs: HiggsSpec,
    #[serde(default = "default_eps0")]
    pub eps0: f64,
    pub fan: FanSpec,
    #[serde(default = "default_transport_tol")]
    pub transport_tol: f64,
}

fn default_eps0() -> f64 {
    0.25
}

fn default_transport_tol() -> f64 {
    1e-12
}

impl Scenario {
    /// Electroweak(3), smooth temporal-gauge connection, smooth Higgs field,
    /// two lines through z = (0.5, 0, 0, 0).
    pub fn electroweak_default(seed: u64) -> Self {
        Scenario {
            model: ModelSpec::electroweak(3),
            connection: ConnectionSpec::Smooth { seed, amplitude: 0.5, temporal: true },
            higgs: HiggsSpec::Smooth { seed: seed + 1, amplitude: 0.5 },
            eps0: default_eps0(),
            fan: FanSpec { z: [0.5, 0.0, 0.0, 0.0], directions: vec![[1.0, 0.0, 0.0], [0.0, 0.6, 0.8]], t_start: 0.0, count: 5, h: 1e-3 },
            transport_tol: default_transport_tol(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LineData {
    pub rays: Vec<LightRay>,
    pub transports: Vec<BlockTransport>,
}

/// Broken transforms x → y → z in the adjoint representation and in ρ.
#[derive(Clone, Debug)]
pub struct TripleData {
    pub x: SpacetimePoint,
    pub y: SpacetimePoint,
    pub z: SpacetimePoint,
    pub s_ad: CMat,
    pub s_rho: CMat,
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub lines: Vec<LineData>,
    pub triples: Vec<TripleData>,
}

/// Coupled transports along the fan, plus one broken triple per line whose
/// second leg is the first ray of that line.
pub fn forward_data_fields<A, P>(a: &A, phi: &P, rep: &Representation, fan: &FanSpec, tol: f64) -> Result<Dataset>
where
    A: ConnectionField + ?Sized,
    P: HiggsField + ?Sized,
{
    let adj = Representation::new(rep.group(), RepSpec::Adjoint)?;
    let lines = fan
        .directions
        .par_iter()
        .map(|dir| {
            let rays = fan.line(dir)?;
            let transports = rays
                .par_iter()
                .map(|r| coupled_transport(a, phi, rep, r, tol))
                .collect::<Result<Vec<_>>>()?;
            Ok(LineData { rays, transports })
        })
        .collect::<Result<Vec<_>>>()?;
    let triples = lines
        .iter()
        .map(|l| {
            let leg = &l.rays[0];
            let (y, z) = (leg.start(), leg.end());
            // first leg arrives at y along the reflected spatial direction
            let tau = 0.1;
            let x = [y[0] - tau, y[1] + tau * leg.velocity[1], y[2] - tau * leg.velocity[2], y[3] + tau * leg.velocity[3]];
            let s_ad = broken_transform(a, &adj, &x, &y, &z, tol)?;
            let s_rho = broken_transform(a, rep, &x, &y, &z, tol)?;
            Ok(TripleData { x, y, z, s_ad, s_rho })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset { lines, triples })
}

pub fn forward_data(scenario: &Scenario) -> Result<Dataset> {
    let (g, rep) = scenario.model.build()?;
    let a = scenario.connection.build(&g)?;
    let phi = scenario.higgs.build(&rep)?;
    check_geometry(scenario)?;
    forward_data_fields(a.as_ref(), phi.as_ref(), &rep, &scenario.fan, scenario.transport_tol)
}

fn check_geometry(scenario: &Scenario) -> Result<()> {
    if !in_observation_set(&scenario.fan.z, scenario.eps0) {
        return Err(LabError::OutsideDomain(format!("z = {:?} is not in the observation set", scenario.fan.z)));
    }
    for dir in &scenario.fan.directions {
        for r in scenario.fan.line(dir)? {
            if !in_diamond_interior(&r.start()) {
                return Err(LabError::OutsideDomain(format!("ray start {:?} leaves the diamond", r.start())));
            }
        }
    }
    Ok(())
}

/// Recovered Φ per line and starting time.
pub fn recover_from(rep: &Representation, data: &Dataset, h: f64) -> Result<Vec<Vec<CVec>>> {
    data.lines.iter().map(|l| reconstruct_higgs(rep, &l.rays, &l.transports, h)).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecoveryPoint {
    pub point: SpacetimePoint,
    pub error: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub max_error: f64,
    pub rms_error: f64,
    pub points: Vec<RecoveryPoint>,
}

pub fn score<P: HiggsField + ?Sized>(data: &Dataset, estimates: &[Vec<CVec>], truth: &P) -> RecoveryReport {
    let points: Vec<RecoveryPoint> = data
        .lines
        .iter()
        .zip(estimates)
        .flat_map(|(l, est)| {
            l.rays.iter().zip(est).map(|(r, e)| {
                let p = r.start();
                RecoveryPoint { point: p, error: (e - truth.value(&p)).norm() }
            })
        })
        .collect();
    let max_error = points.iter().map(|p| p.error).fold(0.0, f64::max);
    let rms_error = (points.iter().map(|p| p.error * p.error).sum::<f64>() / points.len().max(1) as f64).sqrt();
    RecoveryReport { max_error, rms_error, points }
}

pub fn recover_phi(scenario: &Scenario, data: &Dataset) -> Result<RecoveryReport> {
    let (_, rep) = scenario.model.build()?;
    let truth = scenario.higgs.build(&rep)?;
    let est = recover_from(&rep, data, scenario.fan.h)?;
    Ok(score(data, &est, truth.as_ref()))
}

/// The hypotheses on (G, ρ) under which Φ is determined by the data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreconditionReport {
    pub fully_charged: bool,
    pub centre_nontrivial: bool,
    pub centre_meets_kernel_trivially: bool,
    pub kernel_dim: usize,
    pub rho_faithful: bool,
    pub ad_plus_rho_faithful: bool,
    pub holds: bool,
}

pub fn check_faithful_recovery_precondition(model: &ModelSpec) -> Result<PreconditionReport> {
    let (g, rep) = model.build()?;
    Ok(precondition_report(&g, &rep))
}

pub fn precondition_report(g: &GroupSpec, rep: &Representation) -> PreconditionReport {
    let fully_charged = rep.is_fully_charged();
    let centre_nontrivial = !g.centre_basis().is_empty();
    let centre_meets_kernel_trivially = rep.centre_meets_kernel_trivially();
    let kernel_dim = rep.kernel_dim();
    PreconditionReport {
        fully_charged,
        centre_nontrivial,
        centre_meets_kernel_trivially,
        kernel_dim,
        rho_faithful: kernel_dim == 0,
        ad_plus_rho_faithful: rep.ad_plus_rho_faithful(),
        holds: fully_charged && centre_nontrivial && centre_meets_kernel_trivially,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Factor;

    #[test]
    fn electroweak_hypotheses() {
        let r = check_faithful_recovery_precondition(&ModelSpec::electroweak(3)).unwrap();
        assert!(r.holds && r.rho_faithful && r.ad_plus_rho_faithful);
        let r = check_faithful_recovery_precondition(&ModelSpec::electroweak(0)).unwrap();
        assert!(!r.holds && r.fully_charged && !r.centre_meets_kernel_trivially);
    }

    #[test]
    fn standard_model_needs_the_adjoint() {
        let m = ModelSpec { factors: vec![Factor::SU3, Factor::SU2, Factor::U1], weights: None, rep: RepSpec::SmHiggs { n_y: 3 } };
        let r = check_faithful_recovery_precondition(&m).unwrap();
        assert_eq!(r.kernel_dim, 8);
        assert!(!r.rho_faithful && r.ad_plus_rho_faithful && r.holds);
    }

    #[test]
    fn fan_rays_end_at_z() {
        let fan = FanSpec { z: [0.5, 0.1, 0.0, 0.0], directions: vec![[0.0, 3.0, 4.0]], t_start: 0.1, count: 3, h: 0.05 };
        let rays = fan.line(&fan.directions[0]).unwrap();
        for (k, r) in rays.iter().enumerate() {
            let e = r.end();
            assert!((0..4).all(|i| (e[i] - fan.z[i]).abs() < 1e-15));
            assert!((r.start()[0] - (0.1 + 0.05 * k as f64)).abs() < 1e-15);
        }
    }

    #[test]
    fn scenario_rejects_unknown_keys() {
        let mut v = serde_json::to_value(Scenario::electroweak_default(1)).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(serde_json::from_value::<Scenario>(v).is_err());
    }
}
