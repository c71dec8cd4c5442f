//! Closed-form values the library must reproduce.

use std::sync::Arc;

use approx::assert_relative_eq;
use colombeau_core::asymptotics::{fit_order, EpsGrid, Sample};
use colombeau_core::expr::Expr;
use colombeau_core::ge::{Battery, EFunc, GenNumberGe};
use colombeau_core::testfn::{make_bump, make_moment_testfn, DistributionSpec, Domain};

fn line() -> Arc<Domain> {
    Arc::new(Domain::interval(-4.0, 4.0).unwrap())
}

#[test]
fn bump_constants() {
    let psi = make_bump(1, 1.0).unwrap();
    assert_relative_eq!(psi.generator.c, 2.252283621043581, max_relative = 1e-10);
    assert_relative_eq!(
        psi.eval(&[0.0]),
        0.828_568_839_869_105_2,
        max_relative = 1e-10
    );
}

#[test]
fn delta_on_scaled_bump_is_exact_on_dyadic_scales() {
    let psi = make_bump(1, 1.0).unwrap();
    let d = EFunc::embed(&DistributionSpec::delta(line()));
    let grid = EpsGrid::default();
    let samples: Vec<Sample> = grid
        .values()
        .into_iter()
        .map(|e| {
            let v = d.value(&psi.scaled(e).unwrap(), &[0.0]).unwrap().unwrap();
            assert_eq!(v, psi.eval(&[0.0]) / e);
            Sample::new(e, v)
        })
        .collect();
    let est = fit_order(&samples, grid.asymptotic_window()).unwrap();
    assert_relative_eq!(est.slope, -1.0, epsilon = 1e-12);
}

#[test]
fn heaviside_on_symmetric_bump_is_one_half() {
    let psi = make_bump(1, 1.0).unwrap();
    let h = EFunc::embed(&DistributionSpec::heaviside(line()).unwrap());
    for k in 1..20 {
        let phi = psi.scaled(2f64.powi(-k)).unwrap();
        assert_relative_eq!(
            h.value(&phi, &[0.0]).unwrap().unwrap(),
            0.5,
            epsilon = 1e-12
        );
    }
}

#[test]
fn sine_embedding_matches_taylor_remainder() {
    // ι(sin)(S_ε φ_q, x) - sin x ≈ ε^{q+1} sin^{(q+1)}(x) m_{q+1} / (q+1)!
    let f =
        EFunc::embed(&DistributionSpec::smooth(Expr::parse("sin(x0)").unwrap(), line()).unwrap());
    let x = 0.3f64;
    let derivs = [x.sin(), x.cos(), -x.sin(), -x.cos()];
    for q in 0..4u32 {
        let phi = make_moment_testfn(1, q, 1, 1.0).unwrap();
        let m = phi.generator.moment(&[q + 1]);
        let fact: f64 = (1..=q + 1).map(f64::from).product();
        let eps = 2f64.powi(-6);
        let v = f.value(&phi.scaled(eps).unwrap(), &[x]).unwrap().unwrap() - x.sin();
        let oracle = eps.powi(q as i32 + 1) * derivs[(q as usize + 1) % 4] * m / fact;
        assert_relative_eq!(v, oracle, max_relative = 0.05);
    }
}

#[test]
fn dyadic_zero_set_of_a_generalized_number() {
    let b = Battery::new(1, 2, 1.0, EpsGrid::default()).unwrap();
    let r = GenNumberGe::parse("eps*(1 - dyadic(eps))").unwrap();
    let s = r.zero_divisor_partner();
    for q in b.orders() {
        for e in b.grid.values() {
            let phi = b.scaled(q, e);
            assert_eq!(r.eval(&phi), 0.0);
            assert_eq!(s.eval(&phi), 1.0);
            assert_eq!(r.mul(&s).eval(&phi), 0.0);
        }
        let off = b.scaled(q, 0.3);
        assert_relative_eq!(r.eval(&off), 0.3);
        assert_eq!(s.eval(&off), 0.0);
    }
}
