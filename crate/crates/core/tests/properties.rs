//! Invariants checked on random inputs.

use std::sync::Arc;

use approx::relative_eq;
use colombeau_core::asymptotics::EpsGrid;
use colombeau_core::expr::Expr;
use colombeau_core::gd::{formalism_translate, gd_point_eval_c, gd_point_eval_j, GdPoint};
use colombeau_core::ge::{Battery, EFunc, GenNumberGe, MatrixGe};
use colombeau_core::testfn::{make_moment_testfn, CompactBox, DistributionSpec, Domain};
use colombeau_core::verdict::Verdict;
use proptest::prelude::*;

fn line() -> Arc<Domain> {
    Arc::new(Domain::interval(-4.0, 4.0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scaling_preserves_mass_and_scales_moments(q in 0u32..5, eps in 0.01f64..1.0, a in 0u32..5) {
        let phi = make_moment_testfn(1, q, 1, 1.0).unwrap();
        let s = phi.scaled(eps).unwrap();
        prop_assert!((s.integrate(|_| 1.0) - 1.0).abs() < 1e-9);
        let m = phi.integrate(|y| y[0].powi(a as i32));
        let ms = s.integrate(|y| y[0].powi(a as i32));
        prop_assert!((ms - eps.powi(a as i32) * m).abs() < 1e-9);
    }

    #[test]
    fn translations_compose(a in -2.0f64..2.0, b in -2.0f64..2.0, y in -3.0f64..3.0) {
        let phi = make_moment_testfn(1, 1, 1, 1.0).unwrap();
        let ab = phi.translated(&[a]).translated(&[b]);
        prop_assert_eq!(ab.shift[0], a + b);
        prop_assert!(relative_eq!(ab.eval(&[y]), phi.eval(&[y - a - b]), epsilon = 1e-12));
    }

    #[test]
    fn numbers_form_a_ring_at_each_sample(c1 in -3.0f64..3.0, c2 in -3.0f64..3.0, k in 1i32..30) {
        let b = Battery::new(1, 1, 1.0, EpsGrid::default()).unwrap();
        let phi = b.scaled(1, 2f64.powi(-k));
        let x = GenNumberGe::scale_of().add(&GenNumberGe::constant(c1));
        let y = GenNumberGe::parse("eps^2").unwrap().sub(&GenNumberGe::constant(c2));
        let z = GenNumberGe::scale_of();
        let lhs = x.add(&y).mul(&z).eval(&phi);
        let rhs = x.mul(&z).add(&y.mul(&z)).eval(&phi);
        prop_assert!(relative_eq!(lhs, rhs, epsilon = 1e-12, max_relative = 1e-12));
        let xv = x.eval(&phi);
        let inv = x.invert().eval(&phi);
        if xv != 0.0 {
            prop_assert!(relative_eq!(xv * inv, 1.0, max_relative = 1e-15));
        } else {
            prop_assert_eq!(inv, 0.0);
        }
    }

    #[test]
    fn adjugate_inverse_of_constant_matrices(v in prop::collection::vec(-2.0f64..2.0, 9)) {
        let b = Battery::new(1, 0, 1.0, EpsGrid::default()).unwrap();
        let phi = b.scaled(0, 0.25);
        let rows: Vec<Vec<GenNumberGe>> = v.chunks(3).map(|r| r.iter().map(|&c| GenNumberGe::constant(c)).collect()).collect();
        let a = MatrixGe::new(rows).unwrap();
        let det = a.det().unwrap().eval(&phi);
        prop_assume!(det.abs() > 1e-2);
        let prod = a.mul(&a.adjugate_inverse().unwrap()).unwrap().eval(&phi);
        for (i, row) in prod.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((x - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn c_and_j_point_values_agree_on_dyadic_pairs(q in 0u32..3, k in 2i32..12, j in -12i32..12, c in -8i32..8) {
        let b = Battery::new(1, 2, 1.0, EpsGrid::default()).unwrap();
        let h = EFunc::embed(&DistributionSpec::heaviside(line()).unwrap());
        let r = h.mul(&EFunc::embed(&DistributionSpec::delta(line()))).unwrap();
        let support = CompactBox::new(vec![-2.0], vec![2.0], 3).unwrap();
        let text = format!("x0/4 + {}*eps", c as f64 / 8.0);
        let x = GdPoint::new(vec![Expr::parse(&text).unwrap()], support).unwrap();
        let pc = gd_point_eval_c(&r, &x).unwrap();
        let pj = gd_point_eval_j(&formalism_translate(&r), &x.conjugated()).unwrap();
        let xv = j as f64 / 8.0;
        let psi = b.scaled(q, 2f64.powi(-k)).translated(&[xv]);
        prop_assert_eq!(pj.eval(&psi, &[xv]).unwrap(), pc.eval_translated(&psi, &[xv]).unwrap());
        let phi = b.scaled(q, 2f64.powi(-k));
        prop_assert_eq!(formalism_translate(&r).eval_c(&phi, &[xv]).unwrap(), r.value(&phi, &[xv]).unwrap());
    }

    #[test]
    fn verdicts_round_trip_through_json(m in 1u32..6, k in 2i32..20) {
        let b = Battery::new(1, 2, 1.0, EpsGrid::default()).unwrap();
        let r = GenNumberGe::parse(&format!("eps^{m} + eps^{k}")).unwrap();
        let v = colombeau_core::ge::strictly_nonzero_verdict(&r, &b, &Default::default()).unwrap();
        let text = serde_json::to_string(&v).unwrap();
        let back: Verdict = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, v);
    }
}
