use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ymhlab::algebra::*;
use ymhlab::fields::SmoothConnection;
use ymhlab::geometry::{kappa_closed, kappa_solve};
use ymhlab::transport::{transport_rep, LightRay};

fn ray(base: [f64; 3], theta: f64, c: f64) -> LightRay {
    let s = (1.0 - c * c).sqrt();
    LightRay::new([-0.4, base[0], base[1], base[2]], [1.0, s * theta.cos(), s * theta.sin(), c], 0.0, 0.4).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pairing_is_antisymmetric_and_defining(n_y in -6i32..=6, seed in any::<u64>()) {
        let g = GroupSpec::electroweak();
        let rep = Representation::new(&g, RepSpec::Electroweak { n_y }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (v, w) = (rep.random_vector(&mut rng), rep.random_vector(&mut rng));
        let x = g.random_algebra(&mut rng, 1.0);
        let jvw = rep.j_rho(&v, &w).unwrap();
        let jwv = rep.j_rho(&w, &v).unwrap();
        prop_assert!(g.norm(&jvw.add(&jwv).unwrap()).unwrap() < 1e-12);
        let lhs = v.dotc(&(rep.rho_star(&x).unwrap() * &w)).re;
        prop_assert!((lhs - g.inner(&jvw, &x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn transports_are_unitary_and_compose(
        seed in 0u64..1000,
        base in prop::array::uniform3(-0.2f64..0.2),
        theta in 0.0f64..std::f64::consts::TAU,
        c in -0.99f64..0.99,
        cut in 0.05f64..0.35,
    ) {
        let g = GroupSpec::electroweak();
        let rep = Representation::new(&g, RepSpec::Electroweak { n_y: 3 }).unwrap();
        let a = SmoothConnection::random(&g, seed, 0.5, false);
        let r = ray(base, theta, c);
        let full = transport_rep(&a, &rep, &r, 1e-12).unwrap();
        let id = CMat::identity(2, 2);
        prop_assert!((full.adjoint() * &full - &id).norm() < 1e-10);
        let (first, second) = r.split(cut).unwrap();
        let both = transport_rep(&a, &rep, &second, 1e-12).unwrap() * transport_rep(&a, &rep, &first, 1e-12).unwrap();
        prop_assert!((both - full).norm() < 1e-9);
    }

    #[test]
    fn kappa_closed_form_solves_the_system(r in -0.95f64..0.95, s in 0.05f64..0.95) {
        let (k, l) = (kappa_closed(r, s).unwrap(), kappa_solve(r, s).unwrap());
        for i in 0..3 {
            prop_assert!((k[i] - l[i]).abs() <= 1e-10 * (1.0 + l[i].abs()));
        }
    }
}
