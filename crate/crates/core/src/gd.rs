//! Sampled interface to the diffeomorphism-invariant full algebra.
//!
//! In the C-formalism a representative is `R(φ, x)` with `φ` centered at the
//! origin; in the J-formalism it is `R^J(ψ, x)` with `ψ` supported near `x`.
//! The two are related by `T(φ, x) = (T_x φ, x)`. Moderateness and
//! negligibility quantify over test-object nets `φ(ε, x)`, of which a
//! finite registered set is sampled here.
//!
//! Point values are evaluated directly on guarded pairs. Pairs outside
//! `U(Ω)` are skipped and counted.

use serde::{Deserialize, Serialize};

use crate::asymptotics::EpsGrid;
use crate::error::{CoreError, Result};
use crate::expr::{EvalCtx, Expr};
use crate::ge::{self, Battery, EFunc, Probes};
use crate::sweep::{self, Family, Reduce, Row, Sampling};
use crate::testfn::{CompactBox, TestFunction};
use crate::verdict::{Config, Probe, Verdict};

/// Fraction of skipped pairs above which a sweep is flagged as too coarse.
pub const SKIP_WARNING_RATE: f64 = 0.5;

// --------------------------------------------------------- test-object nets

/// Finite bounds observed over `ε ∈ grid`, `x ∈ K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetBounds {
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Largest support radius of `φ(ε, x)`.
    pub radius_max: f64,
    /// Largest sup-norm of `φ(ε, x)`.
    pub sup_max: f64,
}

/// `φ(ε, x) = S_{σ(ε, x)} φ_q`, so `S_ε φ(ε, x) = S_{ε σ(ε, x)} φ_q`.
#[derive(Debug, Clone)]
pub struct TestObjectNet {
    pub name: String,
    pub q: u32,
    pub generator: TestFunction,
    /// Positive, bounded modulation in `eps` and the point variables.
    pub sigma: Expr,
    pub bounds: Option<NetBounds>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetManifest {
    pub name: String,
    pub q: u32,
    pub generator: String,
    pub sigma: String,
    pub bounds: Option<NetBounds>,
}

impl TestObjectNet {
    pub fn new(
        name: impl Into<String>,
        generator: TestFunction,
        q: u32,
        sigma: Expr,
    ) -> Result<Self> {
        if !generator.is_canonical() {
            return Err(CoreError::NotCanonical {
                scale: generator.scale,
                shift: generator.shift.clone(),
            });
        }
        let order = generator.certified_order().order;
        if order < q {
            return Err(CoreError::InvalidArgument(format!(
                "generator {} has moment order {order} < declared {q}",
                generator.id()
            )));
        }
        if sigma.var_bound() > generator.n() {
            return Err(CoreError::DimensionMismatch {
                expected: generator.n(),
                found: sigma.var_bound(),
            });
        }
        Ok(TestObjectNet {
            name: name.into(),
            q,
            generator,
            sigma,
            bounds: None,
        })
    }

    /// `φ(ε, x) ≡ φ_q`.
    pub fn constant(battery: &Battery, q: u32) -> Self {
        Self::new(
            format!("const:q{q}"),
            battery.phi(q).clone(),
            q,
            Expr::c(1.0),
        )
        .expect("battery generators are canonical")
    }

    pub fn n(&self) -> usize {
        self.generator.n()
    }

    pub fn depends_on_x(&self) -> bool {
        self.sigma.uses_vars()
    }

    pub fn sigma_at(&self, eps: f64, x: &[f64]) -> f64 {
        self.sigma.eval(&EvalCtx::at(eps, x))
    }

    /// `S_ε φ(ε, x)`.
    pub fn at(&self, eps: f64, x: &[f64]) -> Result<TestFunction> {
        let s = self.sigma_at(eps, x);
        if !(s > 0.0 && s.is_finite()) {
            return Err(CoreError::InvalidArgument(format!(
                "net {} has modulation {s} at eps = {eps:e}, x = {x:?}",
                self.name
            )));
        }
        self.generator.scaled(eps * s)
    }

    /// Sample `σ` over the grid and the nodes of `K` and record the bounds.
    pub fn certify(mut self, k: &CompactBox, grid: &EpsGrid) -> Result<Self> {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        let nodes = k.nodes();
        for eps in grid.values() {
            for x in &nodes {
                let s = self.sigma_at(eps, x);
                if !(s > 0.0 && s.is_finite()) {
                    return Err(CoreError::InvalidArgument(format!(
                        "net {} is unbounded: modulation {s} at eps = {eps:e}, x = {x:?}",
                        self.name
                    )));
                }
                lo = lo.min(s);
                hi = hi.max(s);
            }
        }
        let sup = self.generator.generator.sup_norm_estimate(33);
        self.bounds = Some(NetBounds {
            sigma_min: lo,
            sigma_max: hi,
            radius_max: hi * self.generator.support_radius(),
            sup_max: sup * lo.powi(-(self.n() as i32)),
        });
        Ok(self)
    }

    pub fn manifest(&self) -> NetManifest {
        NetManifest {
            name: self.name.clone(),
            q: self.q,
            generator: self.generator.id().to_string(),
            sigma: self.sigma.to_string(),
            bounds: self.bounds,
        }
    }
}

/// Registered nets standing in for `∀φ ∈ C^∞_b(I × Ω, A_q(ℝⁿ))`.
#[derive(Debug, Clone)]
pub struct NetSet {
    pub nets: Vec<TestObjectNet>,
    pub grid: EpsGrid,
}

impl NetSet {
    pub fn new(nets: Vec<TestObjectNet>, grid: EpsGrid) -> Result<Self> {
        let n = nets
            .first()
            .ok_or_else(|| CoreError::InvalidArgument("no test-object nets given".into()))?
            .n();
        if let Some(bad) = nets.iter().find(|t| t.n() != n) {
            return Err(CoreError::DimensionMismatch {
                expected: n,
                found: bad.n(),
            });
        }
        for (i, a) in nets.iter().enumerate() {
            if nets[..i].iter().any(|b| b.name == a.name) {
                return Err(CoreError::InvalidArgument(format!(
                    "duplicate net name {}",
                    a.name
                )));
            }
        }
        Ok(NetSet { nets, grid })
    }

    /// The constant nets `φ(ε, x) ≡ φ_q` of a battery.
    pub fn from_battery(battery: &Battery) -> Self {
        let nets = battery
            .orders()
            .map(|q| TestObjectNet::constant(battery, q))
            .collect();
        NetSet {
            nets,
            grid: battery.grid.clone(),
        }
    }

    pub fn net(&self, name: &str) -> Option<&TestObjectNet> {
        self.nets.iter().find(|t| t.name == name)
    }

    /// Certify every net on `K`.
    pub fn certify(self, k: &CompactBox) -> Result<Self> {
        let grid = self.grid.clone();
        let nets = self
            .nets
            .into_iter()
            .map(|t| t.certify(k, &grid))
            .collect::<Result<_>>()?;
        Ok(NetSet { nets, grid })
    }

    pub fn manifest(&self) -> Vec<NetManifest> {
        self.nets.iter().map(TestObjectNet::manifest).collect()
    }
}

impl Probes for NetSet {
    fn n(&self) -> usize {
        self.nets[0].n()
    }

    fn grid(&self) -> &EpsGrid {
        &self.grid
    }

    fn id(&self) -> String {
        let names: Vec<&str> = self.nets.iter().map(|t| t.name.as_str()).collect();
        format!("nets:{}:{}", names.join(","), self.grid.label())
    }

    fn families(
        &self,
        r: &EFunc,
        sampling: Sampling<'_>,
        alpha: &[u32],
        reduce: Reduce,
    ) -> Result<Vec<Family>> {
        self.nets
            .iter()
            .map(|t| {
                let rows = sweep::sweep(&self.grid.values(), sampling, reduce, |e, x| {
                    r.eval(&t.at(e, x)?, x, alpha)
                })?;
                Ok(Family {
                    q: t.q,
                    label: t.name.clone(),
                    rows,
                })
            })
            .collect()
    }

    fn locate(&self, fam: &Family, alpha: &[u32], row: &Row) -> Result<(Probe, TestFunction)> {
        let t = self
            .net(&fam.label)
            .ok_or_else(|| CoreError::InvalidArgument(format!("unknown net {}", fam.label)))?;
        let probe = Probe::GdNet {
            net: t.name.clone(),
            alpha: alpha.to_vec(),
            x: row.point.clone(),
        };
        Ok((probe, t.at(row.eps, &row.point)?))
    }
}

fn check_nets(r: &EFunc, k: &CompactBox, nets: &NetSet, alpha_max: u32) -> Result<Option<Verdict>> {
    r.domain.check_compact(k)?;
    if let Some(t) = nets.nets.iter().find(|t| t.bounds.is_none()) {
        return Err(CoreError::InvalidArgument(format!(
            "net {} has no boundedness certificate",
            t.name
        )));
    }
    if alpha_max > 0 {
        if let Some(t) = nets.nets.iter().find(|t| t.depends_on_x()) {
            return Ok(Some(Verdict::inconclusive(format!(
                "net {} depends on x; derivatives through the test-object slot are not sampled",
                t.name
            ))));
        }
    }
    Ok(None)
}

/// `∃N: sup_K |∂^α R(S_ε φ(ε, x), x)| = O(ε^{-N})` for each registered net
/// and `|α| ≤ alpha_max`.
pub fn gd_moderate_verdict(
    r: &EFunc,
    k: &CompactBox,
    alpha_max: u32,
    nets: &NetSet,
    cfg: &Config,
) -> Result<Verdict> {
    if let Some(v) = check_nets(r, k, nets, alpha_max)? {
        return Ok(v);
    }
    ge::moderate_on(
        r,
        Sampling::Box {
            k,
            stencil: cfg.eps_stencil,
        },
        alpha_max,
        nets,
        cfg,
    )
}

/// `∀m ∃q: sup_K |R(S_ε φ(ε, x), x)| = O(ε^m)` for each registered net of
/// order at least `q`, given moderateness.
pub fn gd_negligible_verdict(
    r: &EFunc,
    k: &CompactBox,
    nets: &NetSet,
    cfg: &Config,
) -> Result<Verdict> {
    if let Some(v) = check_nets(r, k, nets, 0)? {
        return Ok(v);
    }
    ge::negligible_on(
        r,
        Sampling::Box {
            k,
            stencil: cfg.eps_stencil,
        },
        nets,
        cfg,
    )
}

// ------------------------------------------------------------- formalisms

/// A representative in the J-formalism, stored as the C-representative it
/// pulls back to: `R^J(ψ, x) = R(T_{-x} ψ, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JFunc {
    pub inner: EFunc,
}

impl JFunc {
    pub fn n(&self) -> usize {
        self.inner.n()
    }

    /// `supp ψ ⊆ Ω`.
    pub fn guard(&self, psi: &TestFunction) -> bool {
        self.inner
            .domain
            .contains_ball(&psi.shift, psi.support_radius())
    }

    /// `R^J(ψ, x)`, `None` unless `supp ψ ⊆ Ω`.
    pub fn eval(&self, psi: &TestFunction, x: &[f64]) -> Result<Option<f64>> {
        if !self.guard(psi) {
            return Ok(None);
        }
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        self.inner.value(&psi.translated(&neg), x)
    }

    /// `(T^{-1})^* R^J (φ, x) = R^J(T_x φ, x)`, evaluated through `R^J`.
    pub fn eval_c(&self, phi: &TestFunction, x: &[f64]) -> Result<Option<f64>> {
        self.eval(&phi.translated(x), x)
    }
}

/// `T^* R`.
pub fn formalism_translate(r: &EFunc) -> JFunc {
    JFunc { inner: r.clone() }
}

/// `(T^{-1})^* R^J`.
pub fn formalism_untranslate(j: &JFunc) -> EFunc {
    j.inner.clone()
}

// ----------------------------------------------------------------- points

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formalism {
    C,
    J,
}

/// A generalized point `X(φ, x)` with range in the compact `support`.
///
/// Coordinates are closed forms in `x`, the scale tag and the generator
/// tag. In the J frame the tags are read from `T_{-x} ψ`, so a J point is
/// the T-conjugate `X^J(ψ, x) = X(T_{-x} ψ, x)` of a C point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdPoint {
    pub coords: Vec<Expr>,
    pub support: CompactBox,
    pub formalism: Formalism,
}

impl GdPoint {
    pub fn new(coords: Vec<Expr>, support: CompactBox) -> Result<Self> {
        if coords.len() != support.n() {
            return Err(CoreError::DimensionMismatch {
                expected: support.n(),
                found: coords.len(),
            });
        }
        if let Some(c) = coords.iter().find(|c| c.var_bound() > support.n()) {
            return Err(CoreError::DimensionMismatch {
                expected: support.n(),
                found: c.var_bound(),
            });
        }
        Ok(GdPoint {
            coords,
            support,
            formalism: Formalism::C,
        })
    }

    pub fn constant(x: &[f64]) -> Self {
        GdPoint {
            coords: x.iter().map(|&v| Expr::c(v)).collect(),
            support: CompactBox::point(x.to_vec()),
            formalism: Formalism::C,
        }
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// `X^J`.
    pub fn conjugated(&self) -> Self {
        GdPoint {
            formalism: Formalism::J,
            ..self.clone()
        }
    }

    /// `X(φ, x)`, without the range check.
    pub fn eval(&self, phi: &TestFunction, x: &[f64]) -> Vec<f64> {
        let frame = match self.formalism {
            Formalism::C => phi.clone(),
            Formalism::J => phi.translated(&x.iter().map(|v| -v).collect::<Vec<_>>()),
        };
        let ctx = ge::tag_ctx(&frame, x);
        self.coords.iter().map(|c| c.eval(&ctx)).collect()
    }

    /// `X(φ, x)`, required to lie in the support box.
    pub fn eval_checked(&self, phi: &TestFunction, x: &[f64]) -> Result<Vec<f64>> {
        let y = self.eval(phi, x);
        if self.support.contains(&y) {
            Ok(y)
        } else {
            Err(CoreError::InvalidArgument(format!(
                "point value {y:?} at {:?}, x = {x:?} leaves its support box",
                phi.tag()
            )))
        }
    }

    fn require(&self, f: Formalism) -> Result<()> {
        if self.formalism == f {
            Ok(())
        } else {
            Err(CoreError::InvalidArgument(format!(
                "point is in the {:?} frame, expected {f:?}",
                self.formalism
            )))
        }
    }
}

/// Skip accounting for a point-evaluation sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub total: usize,
    pub skipped: usize,
    pub warning: Option<String>,
}

impl Coverage {
    fn from_counts(total: usize, skipped: usize) -> Self {
        let warning = (total > 0 && skipped as f64 > SKIP_WARNING_RATE * total as f64).then(|| {
            format!("{skipped} of {total} pairs violate the guard; evaluation regime too coarse")
        });
        Coverage {
            total,
            skipped,
            warning,
        }
    }
}

/// `R(X)(φ, x) = R(φ, X(φ, x))`.
#[derive(Debug, Clone)]
pub struct PointEvalC {
    pub r: EFunc,
    pub x: GdPoint,
}

/// `R(X)(ψ, x) = R^J(T_{X(ψ, x) - x} ψ, X(ψ, x))`.
#[derive(Debug, Clone)]
pub struct PointEvalJ {
    pub r: JFunc,
    pub x: GdPoint,
}

pub fn gd_point_eval_c(r: &EFunc, x: &GdPoint) -> Result<PointEvalC> {
    x.require(Formalism::C)?;
    r.domain.check_compact(&x.support)?;
    Ok(PointEvalC {
        r: r.clone(),
        x: x.clone(),
    })
}

pub fn gd_point_eval_j(r: &JFunc, x: &GdPoint) -> Result<PointEvalJ> {
    x.require(Formalism::J)?;
    r.inner.domain.check_compact(&x.support)?;
    Ok(PointEvalJ {
        r: r.clone(),
        x: x.clone(),
    })
}

fn coverage_of(
    pairs: &[(TestFunction, Vec<f64>)],
    f: impl Fn(&TestFunction, &[f64]) -> Result<Option<f64>>,
) -> Result<Coverage> {
    let mut skipped = 0;
    for (phi, x) in pairs {
        if f(phi, x)?.is_none() {
            skipped += 1;
        }
    }
    Ok(Coverage::from_counts(pairs.len(), skipped))
}

impl PointEvalC {
    pub fn eval(&self, phi: &TestFunction, x: &[f64]) -> Result<Option<f64>> {
        let y = self.x.eval_checked(phi, x)?;
        self.r.value(phi, &y)
    }

    /// `T^*(R(X))(ψ, x) = R(X)(T_{-x} ψ, x)`.
    pub fn eval_translated(&self, psi: &TestFunction, x: &[f64]) -> Result<Option<f64>> {
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        self.eval(&psi.translated(&neg), x)
    }

    pub fn coverage(&self, pairs: &[(TestFunction, Vec<f64>)]) -> Result<Coverage> {
        coverage_of(pairs, |phi, x| self.eval(phi, x))
    }
}

impl PointEvalJ {
    pub fn eval(&self, psi: &TestFunction, x: &[f64]) -> Result<Option<f64>> {
        let y = self.x.eval_checked(psi, x)?;
        let offset: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        self.r.eval(&psi.translated(&offset), &y)
    }

    pub fn coverage(&self, pairs: &[(TestFunction, Vec<f64>)]) -> Result<Coverage> {
        coverage_of(pairs, |psi, x| self.eval(psi, x))
    }
}

// ---------------------------------------------------------------- constancy

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstancyWitness {
    pub test_function: crate::testfn::TfTag,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub at_x: Vec<f64>,
    pub at_y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constancy {
    pub constant: bool,
    pub witness: Option<ConstancyWitness>,
}

/// `X(φ, x) = X(φ, y)` on every sampled `φ` and pair of points, exactly.
pub fn constancy_check(x: &GdPoint, phis: &[TestFunction], points: &[Vec<f64>]) -> Constancy {
    for phi in phis {
        let Some(first) = points.first() else { break };
        let base = x.eval(phi, first);
        for p in &points[1..] {
            let v = x.eval(phi, p);
            if v != base {
                return Constancy {
                    constant: false,
                    witness: Some(ConstancyWitness {
                        test_function: phi.tag(),
                        x: first.clone(),
                        y: p.clone(),
                        at_x: base,
                        at_y: v,
                    }),
                };
            }
        }
    }
    Constancy {
        constant: true,
        witness: None,
    }
}

/// Every sampled pair `(S_ε φ(ε, x), x)` of a net set, for point-evaluation
/// sweeps.
pub fn net_pairs(nets: &NetSet, k: &CompactBox) -> Result<Vec<(TestFunction, Vec<f64>)>> {
    let mut out = Vec::new();
    for t in &nets.nets {
        for eps in nets.grid.values() {
            for x in k.nodes() {
                out.push((t.at(eps, &x)?, x));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ge::{ge_moderate_verdict, ge_negligible_verdict, GenNumberGe};
    use crate::testfn::{DistributionSpec, Domain};
    use std::sync::Arc;

    fn line() -> Arc<Domain> {
        Arc::new(Domain::interval(-2.0, 2.0).unwrap())
    }

    fn k() -> CompactBox {
        CompactBox::new(vec![-0.5], vec![0.5], 9).unwrap()
    }

    fn same(a: &Verdict, b: &Verdict) {
        assert_eq!(a.name(), b.name());
        assert_eq!(a.certificates, b.certificates);
        match (a.witness(), b.witness()) {
            (Some(x), Some(y)) => {
                assert_eq!(x.test_function, y.test_function);
                assert_eq!(
                    (x.eps, x.magnitude, x.exponent),
                    (y.eps, y.magnitude, y.exponent)
                );
                assert_eq!(x.sequence, y.sequence);
            }
            (None, None) => {}
            _ => panic!("witness presence differs"),
        }
    }

    #[test]
    fn constant_nets_reproduce_battery_verdicts() {
        let b = Battery::new(1, 3, 1.0, EpsGrid::default()).unwrap();
        let nets = NetSet::from_battery(&b).certify(&k()).unwrap();
        let cfg = Config::default();
        let d = EFunc::embed(&DistributionSpec::delta(line()));
        let sq = d.mul(&d).unwrap();
        for r in [&d, &sq] {
            same(
                &gd_moderate_verdict(r, &k(), 1, &nets, &cfg).unwrap(),
                &ge_moderate_verdict(r, &k(), 1, &b, &cfg).unwrap(),
            );
            same(
                &gd_negligible_verdict(r, &k(), &nets, &cfg).unwrap(),
                &ge_negligible_verdict(r, &k(), &b, &cfg).unwrap(),
            );
        }
    }

    #[test]
    fn uncertified_and_x_dependent_nets() {
        let b = Battery::new(1, 1, 1.0, EpsGrid::default()).unwrap();
        let d = EFunc::embed(&DistributionSpec::delta(line()));
        let raw = NetSet::from_battery(&b);
        assert!(gd_negligible_verdict(&d, &k(), &raw, &Config::default()).is_err());
        let t = TestObjectNet::new(
            "wobble",
            b.phi(1).clone(),
            1,
            Expr::parse("1 + x0^2").unwrap(),
        )
        .unwrap();
        let nets = NetSet::new(vec![t], b.grid.clone())
            .unwrap()
            .certify(&k())
            .unwrap();
        let bounds = nets.nets[0].bounds.unwrap();
        assert_eq!((bounds.sigma_min, bounds.sigma_max), (1.0, 1.25));
        assert!(gd_moderate_verdict(&d, &k(), 1, &nets, &Config::default())
            .unwrap()
            .is_inconclusive());
        let v = gd_moderate_verdict(&d, &k(), 0, &nets, &Config::default()).unwrap();
        assert!(matches!(v.certificate("N"), Some(1 | 2)));
        let bad =
            TestObjectNet::new("neg", b.phi(0).clone(), 0, Expr::parse("x0").unwrap()).unwrap();
        assert!(bad.certify(&k(), &b.grid).is_err());
    }

    #[test]
    fn round_trip_and_j_point_value() {
        let b = Battery::new(1, 2, 1.0, EpsGrid::default()).unwrap();
        let d = EFunc::embed(&DistributionSpec::delta(line()));
        let j = formalism_translate(&d);
        assert_eq!(formalism_untranslate(&j), d);
        let phi = b.scaled(1, 0.125);
        for x in [-0.5, 0.0, 0.25, 0.75] {
            assert_eq!(j.eval_c(&phi, &[x]).unwrap(), d.value(&phi, &[x]).unwrap());
            let psi = phi.translated(&[x]);
            assert_eq!(j.eval(&psi, &[x]).unwrap().unwrap(), phi.eval(&[-x]));
        }
        let origin = GdPoint::constant(&[0.25]);
        let c = gd_point_eval_c(&d, &origin).unwrap();
        assert_eq!(
            c.eval(&phi, &[0.5]).unwrap(),
            d.value(&phi, &[0.25]).unwrap()
        );
        assert!(gd_point_eval_j(&j, &origin).is_err());
    }

    #[test]
    fn c_and_j_point_values_agree() {
        let b = Battery::new(1, 2, 1.0, EpsGrid::default()).unwrap();
        let h = EFunc::embed(&DistributionSpec::heaviside(line()).unwrap());
        let r = h
            .mul(
                &EFunc::rho(&GenNumberGe::scale_of(), line())
                    .add(&h)
                    .unwrap(),
            )
            .unwrap();
        let support = CompactBox::new(vec![-1.0], vec![1.0], 3).unwrap();
        let x = GdPoint::new(vec![Expr::parse("x0/2 + eps").unwrap()], support).unwrap();
        let c = gd_point_eval_c(&r, &x).unwrap();
        let j = gd_point_eval_j(&formalism_translate(&r), &x.conjugated()).unwrap();
        for q in 0..=2 {
            for e in [0.5, 0.125, 0.03125] {
                for xv in [-0.75, -0.25, 0.0, 0.5] {
                    let psi = b.scaled(q, e).translated(&[xv]);
                    assert_eq!(
                        j.eval(&psi, &[xv]).unwrap(),
                        c.eval_translated(&psi, &[xv]).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn coverage_warns_when_most_pairs_are_guarded_out() {
        let b = Battery::new(1, 0, 1.0, EpsGrid::default()).unwrap();
        let d = EFunc::embed(&DistributionSpec::delta(line()));
        let edge = GdPoint::constant(&[1.8]);
        let c = gd_point_eval_c(&d, &edge).unwrap();
        let pairs: Vec<_> = [0.5, 0.25, 0.125, 0.0625, 0.03125]
            .iter()
            .map(|&e| (b.scaled(0, e), vec![0.0]))
            .collect();
        let cov = c.coverage(&pairs).unwrap();
        assert_eq!((cov.total, cov.skipped), (5, 2));
        assert!(cov.warning.is_none());
        let far = gd_point_eval_c(&d, &GdPoint::constant(&[1.9])).unwrap();
        assert!(far.coverage(&pairs).unwrap().warning.is_some());
    }

    #[test]
    fn constancy() {
        let b = Battery::new(1, 2, 1.0, EpsGrid::default()).unwrap();
        let phis: Vec<_> = [0.5, 0.25, 0.0625]
            .iter()
            .map(|&e| b.scaled(1, e))
            .collect();
        let pts = vec![vec![-0.5], vec![0.0], vec![0.75]];
        let support = CompactBox::new(vec![-1.0], vec![1.0], 3).unwrap();
        let scale = GdPoint::new(vec![Expr::parse("0.5*eps").unwrap()], support.clone()).unwrap();
        assert!(constancy_check(&scale, &phis, &pts).constant);
        assert!(constancy_check(&GdPoint::constant(&[0.3]), &phis, &pts).constant);
        let id = GdPoint::new(vec![Expr::parse("x0").unwrap()], support).unwrap();
        let c = constancy_check(&id, &phis, &pts);
        assert!(!c.constant);
        let w = c.witness.unwrap();
        assert_eq!((w.at_x, w.at_y), (vec![-0.5], vec![0.0]));
    }
}
