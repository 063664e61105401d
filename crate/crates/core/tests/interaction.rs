use num_complex::Complex64;
use num_traits::Zero;
use ymhlab::algebra::*;
use ymhlab::geometry::{kappa_closed, kappa_solve, DEFAULT_EPS0, InteractionGeometry};
use ymhlab::interaction::exact::{self, rational, to_c64, to_f64, ExactInputs};
use ymhlab::interaction::InteractionState;

// (r, a(r)) pairs on the unit circle with rational coordinates
const POINTS: [((i64, i64), (i64, i64)); 4] = [
    ((3, 5), (4, 5)),
    ((-5, 13), (12, 13)),
    ((8, 17), (15, 17)),
    ((0, 1), (1, 1)),
];
const S: [((i64, i64), (i64, i64)); 3] = [((3, 5), (4, 5)), ((5, 13), (12, 13)), ((7, 25), (24, 25))];

fn inputs(r: ((i64, i64), (i64, i64)), s: ((i64, i64), (i64, i64))) -> ExactInputs<num_rational::BigRational> {
    ExactInputs {
        r: rational(r.0 .0, r.0 .1),
        s: rational(s.0 .0, s.0 .1),
        a_r: rational(r.1 .0, r.1 .1),
        a_s: rational(s.1 .0, s.1 .1),
        b2: rational(2, 1),
        b3: rational(-3, 2),
        upsilon1: num_complex::Complex::new(rational(1, 1), rational(2, 1)),
    }
}

#[test]
fn exact_zeros_hold_at_every_rational_point() {
    for r in POINTS {
        for s in S {
            let out = exact::run(&inputs(r, s)).unwrap();
            assert!(out.w_pair.iter().flatten().all(|x| x.is_zero()));
            assert!(out.w_triple.iter().all(|x| x.is_zero()));
            assert!(out.y_pair[2].is_zero());
        }
    }
}

// The same formulas in f64, and the matrix-valued state for U(1), agree
// with the rational values.
#[test]
fn float_routes_match_rational_values() {
    let rep = Representation::new(&GroupSpec::u1(), RepSpec::Charge { n: 1 }).unwrap();
    for r in POINTS {
        for s in S {
            let inp = inputs(r, s);
            let ex = exact::run(&inp).unwrap();
            let fl = exact::run(&exact::to_float_inputs(&inp)).unwrap();
            let (rf, sf) = (to_f64(&inp.r), to_f64(&inp.s));

            let k_closed = kappa_closed(rf, sf).unwrap();
            let k_solve = kappa_solve(rf, sf).unwrap();
            for i in 0..3 {
                let want = to_f64(&ex.kappa[i]);
                assert!((fl.kappa[i] - want).abs() < 1e-12);
                assert!((k_closed[i] - want).abs() < 1e-12);
                assert!((k_solve[i] - want).abs() < 1e-10, "r = {rf}, s = {sf}");
            }

            let geom = InteractionGeometry::build(rf, sf, DEFAULT_EPS0).unwrap();
            let ups = CVec::from_vec(vec![Complex64::new(1.0, 2.0)]);
            let mut st = InteractionState::new(geom, &rep, vec![2.0], vec![-1.5], ups).unwrap();
            st.run(None, 1e-12).unwrap();
            let close = |a: Complex64, b: Complex64| (a - b).norm() < 1e-9 * (1.0 + b.norm());
            for k in 0..3 {
                assert!(close(st.y_pair[k][0], to_c64(&ex.y_pair[k])), "pair {k} at r = {rf}, s = {sf}");
            }
            assert!(close(st.threefold_display().unwrap()[0], to_c64(&ex.y_triple_display)));
            assert!(close(st.y_triple[0], to_c64(&ex.y_triple_assembled)));
            assert!(close(st.limit()[0], to_c64(&ex.limit)));
        }
    }
}

#[test]
fn inconsistent_inputs_are_refused() {
    let mut inp = inputs(POINTS[0], S[0]);
    inp.a_s = rational(1, 2);
    assert!(exact::run(&inp).is_none());
}
