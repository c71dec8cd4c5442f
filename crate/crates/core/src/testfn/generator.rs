//! Bump and vanishing-moment generators, tagged test functions and registries.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::quadrature::{tensor_rule, Accumulator};
use crate::error::{CoreError, Result};
use crate::expr::Polynomial;
use crate::jet::{univariate, Jet, JetSpace};
use crate::multiindex::{self, MultiIndex};

pub const TOL_MOMENT: f64 = 1e-9;
pub const ORDER_THRESHOLD: f64 = 1e-6;

/// Default Gauss–Legendre nodes per axis for a generator in dimension `n`.
///
/// The radial bump has a spherical support boundary that is not aligned
/// with a tensor grid; 64 nodes leave a relative error near 1e-8 in two
/// dimensions, 128 bring it below 1e-11.
pub fn default_nodes(n: usize) -> usize {
    if n == 1 {
        64
    } else {
        128
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentCertificate {
    /// `a` with the generator in `A_a \ A_{a+1}` (or the integral-0 analogue).
    pub order: u32,
    /// Largest `|∫ y^α φ|` over `|α| = a + 1`.
    pub next_moment: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    Bump,
    Moment { q: u32, mass: u8 },
}

/// An unscaled, untranslated test function `y ↦ p(y)·c·exp(-1/(1-|y|²/ρ²))`.
#[derive(Debug)]
pub struct Generator {
    pub id: String,
    pub n: usize,
    pub rho: f64,
    pub kind: GeneratorKind,
    pub nodes: usize,
    /// Normalizer of the bump weight.
    pub c: f64,
    pub poly: Polynomial,
    pub certificate: MomentCertificate,
    /// Quadrature points of `[-ρ, ρ]^n` with weight times generator value.
    quad_points: Vec<Vec<f64>>,
    quad_wg: Vec<f64>,
    designed: BTreeMap<MultiIndex, f64>,
    moment_cache: Mutex<HashMap<MultiIndex, f64>>,
}

fn bump_weight(y: &[f64], rho: f64) -> f64 {
    let s: f64 = y.iter().map(|v| (v / rho) * (v / rho)).sum();
    univariate::bump_sq(s, 0)[0]
}

fn fmt_id(kind: GeneratorKind, n: usize, rho: f64, nodes: usize) -> String {
    let base = match kind {
        GeneratorKind::Bump => format!("bump:n{n}:r{rho:?}"),
        GeneratorKind::Moment { q, mass } => format!("mom:n{n}:q{q}:m{mass}:r{rho:?}"),
    };
    if nodes == default_nodes(n) {
        base
    } else {
        format!("{base}:g{nodes}")
    }
}

impl Generator {
    fn build(kind: GeneratorKind, n: usize, rho: f64, nodes: usize) -> Result<Generator> {
        if n == 0 {
            return Err(CoreError::InvalidArgument(
                "dimension must be positive".into(),
            ));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(CoreError::InvalidArgument(format!(
                "support radius {rho} must be positive"
            )));
        }
        if nodes < 2 {
            return Err(CoreError::InvalidArgument(
                "need at least two quadrature nodes".into(),
            ));
        }
        let (points, weights) = tensor_rule(&vec![-rho; n], &vec![rho; n], nodes);
        let bump: Vec<f64> = points.iter().map(|p| bump_weight(p, rho)).collect();
        let mut acc = Accumulator::default();
        for (w, b) in weights.iter().zip(&bump) {
            acc.add(w * b);
        }
        let c = 1.0 / acc.total();
        let wb: Vec<f64> = weights.iter().zip(&bump).map(|(w, b)| w * b * c).collect();

        let mut designed = BTreeMap::new();
        let poly = match kind {
            GeneratorKind::Bump => Polynomial::constant(n, 1.0),
            GeneratorKind::Moment { q, mass } => {
                let basis = multiindex::up_to(n, q + 1);
                let m = basis.len();
                let mut gram = DMatrix::<f64>::zeros(m, m);
                for (r, a) in basis.iter().enumerate() {
                    for (s, b) in basis.iter().enumerate().skip(r) {
                        let ab = multiindex::add(a, b);
                        let mut acc = Accumulator::default();
                        for (p, w) in points.iter().zip(&wb) {
                            acc.add(w * multiindex::monomial(p, &ab));
                        }
                        gram[(r, s)] = acc.total();
                        gram[(s, r)] = acc.total();
                    }
                }
                let mut beta = vec![0; n];
                beta[0] = q + 1;
                let targets: Vec<f64> = basis
                    .iter()
                    .map(|a| {
                        let d = multiindex::degree(a);
                        if d == 0 {
                            mass as f64
                        } else if *a == beta {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect();
                for (a, t) in basis.iter().zip(&targets) {
                    designed.insert(a.clone(), *t);
                }
                let rhs = DVector::from_vec(targets);
                let lu = gram.clone().lu();
                let mut coef = lu
                    .solve(&rhs)
                    .ok_or(CoreError::SingularMomentSystem { n, q })?;
                // one step of iterative refinement
                let residual = &rhs - &gram * &coef;
                if let Some(delta) = lu.solve(&residual) {
                    coef += delta;
                }
                if coef.iter().any(|v| !v.is_finite()) {
                    return Err(CoreError::SingularMomentSystem { n, q });
                }
                let mut terms = BTreeMap::new();
                for (a, v) in basis.into_iter().zip(coef.iter()) {
                    terms.insert(a, *v);
                }
                Polynomial { n, terms }
            }
        };
        if let GeneratorKind::Bump = kind {
            designed.insert(vec![0; n], 1.0);
        }
        let quad_wg: Vec<f64> = points
            .iter()
            .zip(&wb)
            .map(|(p, w)| w * poly.eval(p))
            .collect();
        let mut g = Generator {
            id: fmt_id(kind, n, rho, nodes),
            n,
            rho,
            kind,
            nodes,
            c,
            poly,
            certificate: MomentCertificate {
                order: 0,
                next_moment: 0.0,
            },
            quad_points: points,
            quad_wg,
            designed,
            moment_cache: Mutex::new(HashMap::new()),
        };
        let q_max = match kind {
            GeneratorKind::Bump => 4,
            GeneratorKind::Moment { q, .. } => q + 1,
        };
        let (order, next_moment) = g.moment_order_raw(q_max, TOL_MOMENT);
        g.certificate = MomentCertificate { order, next_moment };
        Ok(g)
    }

    pub fn mass(&self) -> f64 {
        match self.kind {
            GeneratorKind::Bump => 1.0,
            GeneratorKind::Moment { mass, .. } => mass as f64,
        }
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        let w = bump_weight(y, self.rho);
        if w == 0.0 {
            return 0.0;
        }
        self.c * w * self.poly.eval(y)
    }

    /// Taylor jet of the generator around `y`.
    pub fn jet(&self, y: &[f64], order: u32) -> Jet<f64> {
        let space = JetSpace::get(self.n, order);
        let s: f64 = y.iter().map(|v| (v / self.rho) * (v / self.rho)).sum();
        if s >= 1.0 {
            return Jet::constant(&space, 0.0);
        }
        let vars: Vec<Jet<f64>> = (0..self.n)
            .map(|i| Jet::variable(&space, i, y[i]))
            .collect();
        let mut s_jet = Jet::constant(&space, 0.0);
        for v in &vars {
            s_jet = s_jet.add(&v.mul(v).scale(1.0 / (self.rho * self.rho)));
        }
        let weight = s_jet.compose(&univariate::bump_sq(s_jet.value(), order));
        let mut poly = Jet::constant(&space, 0.0);
        for (alpha, coef) in &self.poly.terms {
            let mut term = Jet::constant(&space, *coef);
            for (i, &a) in alpha.iter().enumerate() {
                if a > 0 {
                    term = term.mul(&vars[i].powi(a));
                }
            }
            poly = poly.add(&term);
        }
        weight.mul(&poly).scale(self.c)
    }

    pub fn derivative(&self, y: &[f64], alpha: &[u32]) -> f64 {
        if alpha.iter().all(|&a| a == 0) {
            return self.eval(y);
        }
        self.jet(y, multiindex::degree(alpha)).derivative(alpha)
    }

    /// `∫ f(v) g(v) dv` by the generator's quadrature rule.
    pub fn integrate(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        let mut acc = Accumulator::default();
        for (p, w) in self.quad_points.iter().zip(&self.quad_wg) {
            if *w != 0.0 {
                acc.add(w * f(p));
            }
        }
        acc.total()
    }

    pub fn quadrature(&self) -> (&[Vec<f64>], &[f64]) {
        (&self.quad_points, &self.quad_wg)
    }

    /// Moment computed by quadrature.
    pub fn quad_moment(&self, alpha: &[u32]) -> f64 {
        self.integrate(|v| multiindex::monomial(v, alpha))
    }

    /// Moment used in exact evaluations: the imposed value where the
    /// construction fixes it, zero where the symmetric bump forces it, and
    /// quadrature otherwise.
    pub fn moment(&self, alpha: &[u32]) -> f64 {
        if let Some(v) = self.designed.get(alpha) {
            return *v;
        }
        if matches!(self.kind, GeneratorKind::Bump) && alpha.iter().any(|a| a % 2 == 1) {
            return 0.0;
        }
        let mut cache = self.moment_cache.lock().expect("moment cache poisoned");
        *cache
            .entry(alpha.to_vec())
            .or_insert_with(|| self.quad_moment(alpha))
    }

    fn moment_order_raw(&self, q_max: u32, tol: f64) -> (u32, f64) {
        for a in 1..=q_max {
            let worst = multiindex::of_degree(self.n, a)
                .iter()
                .map(|alpha| self.quad_moment(alpha).abs())
                .fold(0.0, f64::max);
            if worst > tol {
                return (a - 1, worst);
            }
        }
        (q_max, 0.0)
    }

    pub fn sup_norm_estimate(&self, samples: usize) -> f64 {
        let k = super::domain::CompactBox::new(
            vec![-self.rho; self.n],
            vec![self.rho; self.n],
            samples,
        )
        .expect("valid box");
        k.nodes()
            .iter()
            .map(|p| self.eval(p).abs())
            .fold(0.0, f64::max)
    }
}

// ------------------------------------------------------------- global store

fn store() -> &'static RwLock<BTreeMap<String, Arc<Generator>>> {
    static STORE: OnceLock<RwLock<BTreeMap<String, Arc<Generator>>>> = OnceLock::new();
    STORE.get_or_init(|| RwLock::new(BTreeMap::new()))
}

fn obtain(kind: GeneratorKind, n: usize, rho: f64, nodes: usize) -> Result<Arc<Generator>> {
    let id = fmt_id(kind, n, rho, nodes);
    if let Some(g) = store().read().expect("generator store poisoned").get(&id) {
        return Ok(g.clone());
    }
    let built = Arc::new(Generator::build(kind, n, rho, nodes)?);
    let mut guard = store().write().expect("generator store poisoned");
    Ok(guard.entry(id).or_insert(built).clone())
}

/// Look up a generator by id, rebuilding it from the id when necessary.
pub fn generator_by_id(id: &str) -> Result<Arc<Generator>> {
    if let Some(g) = store().read().expect("generator store poisoned").get(id) {
        return Ok(g.clone());
    }
    let unknown = || CoreError::UnknownGenerator(id.to_string());
    let parts: Vec<&str> = id.split(':').collect();
    let field =
        |prefix: char, s: &str| -> Option<String> { s.strip_prefix(prefix).map(str::to_string) };
    let (kind, rest) = match parts.first() {
        Some(&"bump") => (GeneratorKind::Bump, &parts[1..]),
        Some(&"mom") if parts.len() >= 5 => {
            let q = field('q', parts[2])
                .and_then(|s| s.parse().ok())
                .ok_or_else(unknown)?;
            let mass = field('m', parts[3])
                .and_then(|s| s.parse().ok())
                .ok_or_else(unknown)?;
            (GeneratorKind::Moment { q, mass }, &[parts[1], parts[4]][..])
        }
        _ => return Err(unknown()),
    };
    let n: usize = rest
        .first()
        .and_then(|s| field('n', s))
        .and_then(|s| s.parse().ok())
        .ok_or_else(unknown)?;
    let rho: f64 = rest
        .get(1)
        .and_then(|s| field('r', s))
        .and_then(|s| s.parse().ok())
        .ok_or_else(unknown)?;
    let nodes = match parts.last().and_then(|s| field('g', s)) {
        Some(g) => g.parse().map_err(|_| unknown())?,
        None => default_nodes(n),
    };
    let g = obtain(kind, n, rho, nodes)?;
    if g.id != id {
        return Err(unknown());
    }
    Ok(g)
}

// ---------------------------------------------------------- test functions

/// Serializable identity of a test function `T_shift S_scale g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfTag {
    pub generator: String,
    pub scale: f64,
    pub shift: Vec<f64>,
}

impl TfTag {
    pub fn resolve(&self) -> Result<TestFunction> {
        let g = generator_by_id(&self.generator)?;
        if self.shift.len() != g.n {
            return Err(CoreError::DimensionMismatch {
                expected: g.n,
                found: self.shift.len(),
            });
        }
        Ok(TestFunction {
            generator: g,
            scale: self.scale,
            shift: self.shift.clone(),
        })
    }
}

/// `y ↦ scale^{-n} g((y - shift)/scale)` for a generator `g`.
#[derive(Debug, Clone)]
pub struct TestFunction {
    pub generator: Arc<Generator>,
    pub scale: f64,
    pub shift: Vec<f64>,
}

pub fn make_bump(n: usize, rho: f64) -> Result<TestFunction> {
    make_bump_with_nodes(n, rho, default_nodes(n))
}

pub fn make_bump_with_nodes(n: usize, rho: f64, nodes: usize) -> Result<TestFunction> {
    Ok(TestFunction::from_generator(obtain(
        GeneratorKind::Bump,
        n,
        rho,
        nodes,
    )?))
}

pub fn make_moment_testfn(n: usize, q: u32, mass: u8, rho: f64) -> Result<TestFunction> {
    make_moment_testfn_with_nodes(n, q, mass, rho, default_nodes(n))
}

pub fn make_moment_testfn_with_nodes(
    n: usize,
    q: u32,
    mass: u8,
    rho: f64,
    nodes: usize,
) -> Result<TestFunction> {
    if mass > 1 {
        return Err(CoreError::InvalidArgument(format!(
            "mass must be 0 or 1, got {mass}"
        )));
    }
    Ok(TestFunction::from_generator(obtain(
        GeneratorKind::Moment { q, mass },
        n,
        rho,
        nodes,
    )?))
}

/// Largest `a ≤ q_max` with all moments of order `1..=a` below `tol`, and
/// the largest moment magnitude of order `a + 1`.
pub fn moment_order(phi: &TestFunction, q_max: u32, tol: f64) -> Result<(u32, f64)> {
    if !phi.is_canonical() {
        return Err(CoreError::NotCanonical {
            scale: phi.scale,
            shift: phi.shift.clone(),
        });
    }
    Ok(phi.generator.moment_order_raw(q_max, tol))
}

impl TestFunction {
    pub fn from_generator(generator: Arc<Generator>) -> Self {
        let n = generator.n;
        TestFunction {
            generator,
            scale: 1.0,
            shift: vec![0.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.generator.n
    }

    pub fn id(&self) -> &str {
        &self.generator.id
    }

    pub fn support_radius(&self) -> f64 {
        self.scale * self.generator.rho
    }

    pub fn mass(&self) -> f64 {
        self.generator.mass()
    }

    pub fn certified_order(&self) -> MomentCertificate {
        self.generator.certificate
    }

    pub fn is_canonical(&self) -> bool {
        self.scale == 1.0 && self.shift.iter().all(|&s| s == 0.0)
    }

    pub fn tag(&self) -> TfTag {
        TfTag {
            generator: self.generator.id.clone(),
            scale: self.scale,
            shift: self.shift.clone(),
        }
    }

    /// `S_ε`: scale multiplies and the translation center scales with it.
    pub fn scaled(&self, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(CoreError::InvalidArgument(format!(
                "scale {eps} must be positive"
            )));
        }
        Ok(TestFunction {
            generator: self.generator.clone(),
            scale: self.scale * eps,
            shift: self.shift.iter().map(|s| s * eps).collect(),
        })
    }

    /// `T_x`: translation tags add.
    pub fn translated(&self, x: &[f64]) -> Self {
        TestFunction {
            generator: self.generator.clone(),
            scale: self.scale,
            shift: self.shift.iter().zip(x).map(|(s, v)| s + v).collect(),
        }
    }

    fn local(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(&self.shift)
            .map(|(v, s)| (v - s) / self.scale)
            .collect()
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.generator.eval(&self.local(y)) * self.scale.powi(-(self.n() as i32))
    }

    pub fn derivative(&self, y: &[f64], alpha: &[u32]) -> f64 {
        let k = self.n() as i32 + multiindex::degree(alpha) as i32;
        self.generator.derivative(&self.local(y), alpha) * self.scale.powi(-k)
    }

    /// `∫ f(y) φ(y) dy`, evaluated in the generator frame.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let mut y = vec![0.0; self.n()];
        self.generator.integrate(|v| {
            for i in 0..v.len() {
                y[i] = self.shift[i] + self.scale * v[i];
            }
            f(&y)
        })
    }
}

/// Registered generators whose scaled copies can be recognized by tag.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    generators: BTreeMap<String, Arc<Generator>>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, phi: &TestFunction) -> Result<()> {
        if !phi.is_canonical() {
            return Err(CoreError::NotCanonical {
                scale: phi.scale,
                shift: phi.shift.clone(),
            });
        }
        self.generators
            .insert(phi.generator.id.clone(), phi.generator.clone());
        Ok(())
    }

    pub fn contains(&self, id: &str) -> bool {
        self.generators.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &String> {
        self.generators.keys()
    }

    /// `(generator id, ε, x)` with `ψ = T_x S_ε φ` for a registered `φ`.
    pub fn match_scaled(&self, psi: &TestFunction) -> Option<(String, f64, Vec<f64>)> {
        if self.contains(psi.id()) {
            Some((psi.id().to_string(), psi.scale, psi.shift.clone()))
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bump_is_normalized_and_supported() {
        let psi = make_bump(1, 1.0).unwrap();
        assert_eq!(psi.eval(&[1.0]), 0.0);
        assert_eq!(psi.eval(&[-1.0]), 0.0);
        assert_eq!(psi.eval(&[1.5]), 0.0);
        assert_relative_eq!(psi.integrate(|_| 1.0), 1.0, epsilon = 1e-10);
        // oracle: c = 1 / ∫ exp(-1/(1-y²)) = 2.252283621043581, ψ(0) = c/e
        assert_relative_eq!(psi.generator.c, 2.252283621043581, max_relative = 1e-10);
        assert_relative_eq!(
            psi.eval(&[0.0]),
            0.828_568_839_869_105_2,
            max_relative = 1e-10
        );
    }

    #[test]
    fn bump_moment_order_is_one() {
        let psi = make_bump(1, 1.0).unwrap();
        let (a, next) = moment_order(&psi, 6, TOL_MOMENT).unwrap();
        assert_eq!(a, 1);
        // oracle: ∫ y² ψ = 0.15807...
        assert!(next > 0.1 && next < 0.2, "{next}");
    }

    #[test]
    fn moment_factory_q2() {
        let phi = make_moment_testfn(1, 2, 1, 1.0).unwrap();
        assert_relative_eq!(phi.generator.quad_moment(&[0]), 1.0, epsilon = 1e-9);
        assert!(phi.generator.quad_moment(&[1]).abs() < 1e-9);
        assert!(phi.generator.quad_moment(&[2]).abs() < 1e-9);
        assert_relative_eq!(phi.generator.quad_moment(&[3]), 1.0, epsilon = 1e-9);
        assert_eq!(phi.certified_order().order, 2);
    }

    #[test]
    fn q0_adds_an_odd_term() {
        let phi = make_moment_testfn(1, 0, 1, 1.0).unwrap();
        let terms = &phi.generator.poly.terms;
        assert_relative_eq!(terms[&vec![0]], 1.0, epsilon = 1e-12);
        // 1/∫y²ψ
        assert!(terms[&vec![1]] > 5.0);
        assert_eq!(phi.certified_order().order, 0);
    }

    #[test]
    fn two_dimensional_system_size() {
        let phi = make_moment_testfn(2, 1, 1, 1.0).unwrap();
        assert_eq!(phi.generator.poly.terms.len(), 6);
        assert_eq!(phi.certified_order().order, 1);
    }

    #[test]
    fn translated_copy_rejected() {
        let phi = make_moment_testfn(1, 3, 1, 1.0).unwrap();
        let (a, next) = moment_order(&phi, 8, TOL_MOMENT).unwrap();
        assert_eq!(a, 3);
        assert_relative_eq!(next, 1.0, epsilon = 1e-8);
        assert!(matches!(
            moment_order(&phi.translated(&[0.5]), 8, TOL_MOMENT),
            Err(CoreError::NotCanonical { .. })
        ));
    }

    #[test]
    fn scaling_and_translation() {
        let phi = make_moment_testfn(1, 1, 1, 1.0).unwrap();
        let half = phi.scaled(0.5).unwrap();
        assert_eq!(half.eval(&[0.0]), 2.0 * phi.eval(&[0.0]));
        let composed = half.scaled(0.25).unwrap();
        assert_eq!(composed.scale, 0.125);
        assert_eq!(composed.id(), phi.id());
        assert_eq!(phi.translated(&[1.0]).eval(&[1.0]), phi.eval(&[0.0]));
        assert_eq!(half.support_radius(), 0.5);
    }

    #[test]
    fn registry_matches_by_tag() {
        let phi3 = make_moment_testfn(1, 3, 1, 1.0).unwrap();
        let mut reg = Registry::new();
        reg.register(&phi3).unwrap();
        let eps = 2f64.powi(-7);
        let psi = phi3.scaled(eps).unwrap();
        assert_eq!(
            reg.match_scaled(&psi),
            Some((phi3.id().to_string(), eps, vec![0.0]))
        );
        assert_eq!(reg.match_scaled(&make_bump(1, 1.0).unwrap()), None);
        let moved = psi.translated(&[0.25]);
        assert_eq!(
            reg.match_scaled(&moved),
            Some((phi3.id().to_string(), eps, vec![0.25]))
        );
    }

    #[test]
    fn ids_round_trip_through_lookup() {
        let phi = make_moment_testfn_with_nodes(1, 2, 0, 0.5, 32).unwrap();
        assert_eq!(phi.id(), "mom:n1:q2:m0:r0.5:g32");
        let g = generator_by_id("mom:n1:q2:m0:r0.5:g32").unwrap();
        assert!(Arc::ptr_eq(&g, &phi.generator));
        let fresh = generator_by_id("mom:n1:q5:m1:r2.0").unwrap();
        assert_eq!(fresh.certificate.order, 5);
        assert!(generator_by_id("mom:n1:zz").is_err());
        assert!(generator_by_id("bump:n2:r1.0").is_ok());
    }

    #[test]
    fn jets_match_finite_differences() {
        let phi = make_moment_testfn(2, 2, 1, 1.0).unwrap();
        let g = &phi.generator;
        let y = [0.2, -0.3];
        let h = 1e-5;
        let fd = (g.eval(&[y[0], y[1] + h]) - g.eval(&[y[0], y[1] - h])) / (2.0 * h);
        assert_relative_eq!(g.derivative(&y, &[0, 1]), fd, max_relative = 1e-4);
    }
}
