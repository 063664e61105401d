use ymhlab::algebra::*;
use ymhlab::fields::*;
use ymhlab::fit::loglog_slope;
use ymhlab::gauge::{apply_gauge, ExpGauge, GaugeField};
use ymhlab::recovery::*;
use ymhlab::transport::reconstruct_higgs;
use ymhlab::LabError;

fn u1() -> ModelSpec {
    ModelSpec { factors: vec![Factor::U1], weights: None, rep: RepSpec::Charge { n: 1 } }
}

fn fan(h: f64, count: usize, t_start: f64) -> FanSpec {
    FanSpec { z: [0.5, 0.0, 0.0, 0.0], directions: vec![[1.0, 0.0, 0.0], [0.0, 0.6, 0.8]], t_start, count, h }
}

fn run(model: ModelSpec, connection: ConnectionSpec, higgs: HiggsSpec, fan: FanSpec) -> RecoveryReport {
    let sc = Scenario { model, connection, higgs, eps0: 0.25, fan, transport_tol: 1e-12 };
    recover_phi(&sc, &forward_data(&sc).unwrap()).unwrap()
}

#[test]
fn constant_field_is_exact() {
    let r = run(
        ModelSpec::electroweak(3),
        ConnectionSpec::Zero,
        HiggsSpec::Constant { re: vec![0.3, -0.2], im: vec![0.1, 0.5] },
        fan(1e-3, 5, 0.0),
    );
    assert!(r.max_error <= 1e-10, "{:e}", r.max_error);
}

#[test]
fn abelian_polynomial_field() {
    let r = run(u1(), ConnectionSpec::Smooth { seed: 7, amplitude: 0.5, temporal: false }, HiggsSpec::Polynomial { seed: 8, amplitude: 0.5 }, fan(1e-3, 5, 0.0));
    assert!(r.rms_error <= 1e-4, "{:e}", r.rms_error);
}

#[test]
fn electroweak_temporal_connection() {
    let sc = Scenario::electroweak_default(9);
    let r = recover_phi(&sc, &forward_data(&sc).unwrap()).unwrap();
    assert!(r.max_error <= 1e-4, "{:e}", r.max_error);
}

#[test]
fn error_is_second_order_in_h() {
    let hs = [0.04, 0.02, 0.01, 0.005];
    let errs = hs.map(|h| {
        run(u1(), ConnectionSpec::Smooth { seed: 7, amplitude: 0.5, temporal: false }, HiggsSpec::Polynomial { seed: 8, amplitude: 0.5 }, fan(h, 3, 0.1 - h))
            .max_error
    });
    assert!(loglog_slope(&hs, &errs).unwrap() >= 1.9, "{errs:?}");
}

// Data generated from (A·U, ρ(U⁻¹)Φ) must return ρ(U⁻¹)Φ.
#[test]
fn recovery_is_gauge_covariant() {
    let (g, rep) = ModelSpec::electroweak(3).build().unwrap();
    let a = SmoothConnection::random(&g, 3, 0.4, false);
    let phi = SmoothHiggs::random(rep.dim(), 4, 0.5);
    let u = ExpGauge::random(&g, 5, 0.5);
    let f = fan(1e-3, 3, 0.05);
    let plain = forward_data_fields(&a, &phi, &rep, &f, 1e-12).unwrap();
    let (ga, gp) = apply_gauge(a, phi, &rep, u.clone());
    let gauged = forward_data_fields(&ga, &gp, &rep, &f, 1e-12).unwrap();
    let (e0, e1) = (recover_from(&rep, &plain, f.h).unwrap(), recover_from(&rep, &gauged, f.h).unwrap());
    for (l, (a0, a1)) in plain.lines.iter().zip(e0.iter().zip(&e1)) {
        for (r, (v0, v1)) in l.rays.iter().zip(a0.iter().zip(a1)) {
            let expect = rep.rho(&u.value(&r.start()).inverse()).unwrap() * v0;
            let gap = (v1 - expect).norm();
            assert!(gap <= 1e-6, "{gap:e}");
        }
    }
}

#[test]
fn adjoint_broken_transform_fixes_the_centre() {
    let sc = Scenario::electroweak_default(11);
    let (g, _) = sc.model.build().unwrap();
    let data = forward_data(&sc).unwrap();
    for t in &data.triples {
        for c in g.centre_basis() {
            let v = CVec::from_iterator(c.len(), c.iter().map(|x| (*x).into()));
            assert!((&t.s_ad * &v - &v).norm() <= 1e-9);
        }
    }
}

#[test]
fn uncharged_representation_is_rejected() {
    let (g, rep) = ModelSpec { factors: vec![Factor::U1], weights: None, rep: RepSpec::Charge { n: 0 } }.build().unwrap();
    let a = ConstantConnection::zero(&g);
    let phi = ConstantHiggs(CVec::from_element(1, 1.0.into()));
    let f = fan(1e-3, 3, 0.0);
    let data = forward_data_fields(&a, &phi, &rep, &f, 1e-10).unwrap();
    let l = &data.lines[0];
    assert!(matches!(reconstruct_higgs(&rep, &l.rays, &l.transports, f.h), Err(LabError::NotFullyCharged)));
}

#[test]
fn scenario_outside_the_observation_set_fails() {
    let mut sc = Scenario::electroweak_default(1);
    sc.fan.z = [0.5, 0.4, 0.0, 0.0];
    assert!(matches!(forward_data(&sc), Err(LabError::OutsideDomain(_))));
}
