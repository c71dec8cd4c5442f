//! The special algebra: ε-indexed nets of smooth functions, generalized
//! numbers and compactly supported generalized points.
//!
//! Nets are closed-form expressions in `eps` and the point variables `x0,
//! x1, …`; derivatives are exact Taylor-jet evaluations. Every verdict is
//! computed from sweeps over an [`EpsGrid`] and a compact grid.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{eps_pow, EpsGrid, Sample};
use crate::error::{CoreError, Result};
use crate::expr::{EvalCtx, Expr, TableEntry};
use crate::multiindex::{self, MultiIndex};
use crate::sweep::{self, Family, NegligibleOutcome, Reduce, Row, Sampling};
use crate::testfn::{CompactBox, Domain};
use crate::verdict::{Config, Probe, Relation, Verdict, Witness};

/// Highest derivative order a net may be asked for by default.
pub const DEFAULT_DERIVATIVE_ORDER: u32 = 2;

/// `(u_ε)_ε`, evaluated as `∂^deriv expr(ε, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionNet {
    pub expr: Expr,
    pub domain: Arc<Domain>,
    pub deriv: MultiIndex,
    pub max_order: u32,
}

impl FunctionNet {
    pub fn new(expr: Expr, domain: Arc<Domain>) -> Result<Self> {
        if expr.var_bound() > domain.n {
            return Err(CoreError::DimensionMismatch {
                expected: domain.n,
                found: expr.var_bound(),
            });
        }
        Ok(FunctionNet {
            expr,
            deriv: vec![0; domain.n],
            domain,
            max_order: DEFAULT_DERIVATIVE_ORDER,
        })
    }

    pub fn parse(text: &str, domain: Arc<Domain>) -> Result<Self> {
        Self::new(Expr::parse(text)?, domain)
    }

    pub fn with_max_order(mut self, d: u32) -> Self {
        self.max_order = d;
        self
    }

    pub fn n(&self) -> usize {
        self.domain.n
    }

    fn base_order(&self) -> u32 {
        multiindex::degree(&self.deriv)
    }

    pub fn eval(&self, eps: f64, x: &[f64]) -> f64 {
        self.expr.derivative_at(&EvalCtx::at(eps, x), &self.deriv)
    }

    /// `∂^α u_ε(x)`.
    pub fn derivative_value(&self, eps: f64, x: &[f64], alpha: &[u32]) -> f64 {
        self.expr
            .derivative_at(&EvalCtx::at(eps, x), &multiindex::add(&self.deriv, alpha))
    }

    /// The net `(∂_i u_ε)_ε`.
    pub fn derivative(&self, i: usize) -> Result<Self> {
        if i >= self.n() {
            return Err(CoreError::InvalidArgument(format!("axis {i} out of range")));
        }
        if self.base_order() >= self.max_order {
            return Err(CoreError::DerivativeOrderExhausted);
        }
        let mut out = self.clone();
        out.deriv[i] += 1;
        Ok(out)
    }

    fn underived(&self) -> Result<()> {
        if self.base_order() == 0 {
            Ok(())
        } else {
            Err(CoreError::Unsupported(
                "ring operations on derivative nets".into(),
            ))
        }
    }

    fn combine(&self, other: &Self, f: impl Fn(Expr, Expr) -> Expr) -> Result<Self> {
        self.underived()?;
        other.underived()?;
        if self.n() != other.n() {
            return Err(CoreError::DimensionMismatch {
                expected: self.n(),
                found: other.n(),
            });
        }
        Ok(FunctionNet {
            expr: f(self.expr.clone(), other.expr.clone()),
            domain: self.domain.clone(),
            deriv: self.deriv.clone(),
            max_order: self.max_order.min(other.max_order),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a * b)
    }
}

/// `(r_ε)_ε`, a closed form in `eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenNumberGs {
    pub expr: Expr,
}

impl GenNumberGs {
    pub fn new(expr: Expr) -> Result<Self> {
        if expr.uses_vars() {
            return Err(CoreError::InvalidArgument(format!(
                "number {expr} reads point variables"
            )));
        }
        Ok(GenNumberGs { expr })
    }

    pub fn eval(&self, eps: f64) -> f64 {
        self.expr.eval(&EvalCtx::eps(eps))
    }

    pub fn samples(&self, grid: &EpsGrid) -> Vec<Sample> {
        grid.values()
            .into_iter()
            .map(|e| Sample::new(e, self.eval(e).abs()))
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        GenNumberGs {
            expr: self.expr.clone() + other.expr.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        GenNumberGs {
            expr: self.expr.clone() * other.expr.clone(),
        }
    }
}

/// `x_ε ∈ K` for all `ε < eta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSupport {
    pub k: CompactBox,
    pub eta: f64,
}

/// `(x_ε)_ε`, one closed form in `eps` per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenPointGs {
    pub coords: Vec<Expr>,
    pub support: Option<PointSupport>,
}

impl GenPointGs {
    pub fn new(coords: Vec<Expr>, support: Option<PointSupport>) -> Result<Self> {
        if let Some(c) = coords.iter().find(|c| c.uses_vars()) {
            return Err(CoreError::InvalidArgument(format!(
                "point coordinate {c} reads point variables"
            )));
        }
        if let Some(s) = &support {
            if s.k.n() != coords.len() {
                return Err(CoreError::DimensionMismatch {
                    expected: coords.len(),
                    found: s.k.n(),
                });
            }
        }
        Ok(GenPointGs { coords, support })
    }

    /// The classical point `x̃ = [(x)_ε]`.
    pub fn constant(x: &[f64]) -> Self {
        GenPointGs {
            coords: x.iter().map(|&v| Expr::c(v)).collect(),
            support: Some(PointSupport {
                k: CompactBox::point(x.to_vec()),
                eta: 1.0,
            }),
        }
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn eval(&self, eps: f64) -> Vec<f64> {
        let ctx = EvalCtx::eps(eps);
        self.coords.iter().map(|c| c.eval(&ctx)).collect()
    }

    /// Check the support certificate on every grid point below `eta`.
    pub fn check_support(&self, grid: &EpsGrid) -> Result<()> {
        let s = self.support.as_ref().ok_or(CoreError::MissingSupport)?;
        for eps in grid.values() {
            if eps < s.eta {
                let x = self.eval(eps);
                if !s.k.contains(&x) {
                    return Err(CoreError::InvalidArgument(format!(
                        "point leaves its support box at ε = {eps:e}: {x:?}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `ũ(x̃) = [(u_ε(x_ε))_ε]`, by substitution.
pub fn gs_point_eval(u: &FunctionNet, x: &GenPointGs) -> Result<GenNumberGs> {
    let s = x.support.as_ref().ok_or(CoreError::MissingSupport)?;
    if x.n() != u.n() {
        return Err(CoreError::DimensionMismatch {
            expected: u.n(),
            found: x.n(),
        });
    }
    u.domain.check_compact(&s.k)?;
    u.underived()?;
    Ok(GenNumberGs {
        expr: u.expr.substitute_vars(&x.coords),
    })
}

fn sampling<'a>(k: &'a CompactBox, cfg: &Config) -> Sampling<'a> {
    Sampling::Box {
        k,
        stencil: cfg.eps_stencil,
    }
}

fn net_family(
    u: &FunctionNet,
    k: &CompactBox,
    alpha: &[u32],
    grid: &EpsGrid,
    cfg: &Config,
) -> Result<Family> {
    let rows = sweep::sweep(&grid.values(), sampling(k, cfg), Reduce::Sup, |e, x| {
        Ok(Some(u.derivative_value(e, x, alpha)))
    })?;
    Ok(Family {
        q: 0,
        label: format!("alpha={alpha:?}"),
        rows,
    })
}

fn net_witness(alpha: &[u32], row: &Row, exponent: f64, sequence: Vec<Sample>) -> Witness {
    Witness {
        probe: Probe::Net {
            alpha: alpha.to_vec(),
            x: row.point.clone(),
        },
        test_function: None,
        eps: row.eps,
        magnitude: row.magnitude,
        exponent,
        relation: Relation::Above,
        sequence,
    }
}

fn prepare(u: &FunctionNet, k: &CompactBox, alpha_max: u32) -> Result<()> {
    u.domain.check_compact(k)?;
    if u.base_order() + alpha_max > u.max_order {
        return Err(CoreError::DerivativeOrderExhausted);
    }
    Ok(())
}

/// `sup_K |∂^α u_ε| = O(ε^{-N})` for every `|α| ≤ alpha_max`.
///
/// Certificate `N`: the smallest exponent passing for every `α`.
pub fn gs_moderate_verdict(
    u: &FunctionNet,
    k: &CompactBox,
    alpha_max: u32,
    grid: &EpsGrid,
    cfg: &Config,
) -> Result<Verdict> {
    prepare(u, k, alpha_max)?;
    let cutoff = grid.window_cutoff();
    let mut estimates = Vec::new();
    let mut n_cert = 0;
    let mut skips = 0;
    for alpha in multiindex::up_to(u.n(), alpha_max) {
        let fam = net_family(u, k, &alpha, grid, cfg)?;
        skips += fam.skips();
        estimates.push(sweep::estimate(fam.label.clone(), &fam.samples(), grid));
        match sweep::moderate_search(std::slice::from_ref(&fam), cfg.n_max, cutoff)? {
            Some(n) => n_cert = n_cert.max(n),
            None => {
                let p = -(cfg.n_max as f64);
                let (row, seq) =
                    sweep::upper_failure(&fam, p, cutoff)?.expect("failed search has a violation");
                let mut v = Verdict::refuted(net_witness(&alpha, row, p, seq));
                v.estimates = estimates;
                v.guard_skips = skips;
                return Ok(v);
            }
        }
    }
    let mut v = Verdict::supported(alpha_max, None).certify("N", n_cert as i64);
    v.estimates = estimates;
    v.guard_skips = skips;
    Ok(v)
}

/// `sup_K |u_ε| = O(ε^m)` for `m = 1..=m_max`, given moderateness.
pub fn gs_negligible_verdict(
    u: &FunctionNet,
    k: &CompactBox,
    grid: &EpsGrid,
    cfg: &Config,
) -> Result<Verdict> {
    let moderate = gs_moderate_verdict(u, k, 0, grid, cfg)?;
    if !moderate.is_supported() {
        return Ok(
            Verdict::inconclusive("negligibility requires a moderate net")
                .component("moderate", moderate),
        );
    }
    let zero = vec![0; u.n()];
    let fam = net_family(u, k, &zero, grid, cfg)?;
    let cutoff = grid.window_cutoff();
    let estimate = sweep::estimate(fam.label.clone(), &fam.samples(), grid);
    let mut v = match sweep::negligible_all_orders(std::slice::from_ref(&fam), cfg.m_max, cutoff)? {
        NegligibleOutcome::Supported(_) => {
            Verdict::supported(cfg.m_max, None).certify("passed_up_to", cfg.m_max as i64)
        }
        NegligibleOutcome::Refuted {
            m, row, sequence, ..
        } => Verdict::refuted(net_witness(&zero, row, m as f64, sequence))
            .certify("passed_up_to", m as i64 - 1),
    };
    v.estimates.push(estimate);
    v.guard_skips = fam.skips();
    Ok(v)
}

/// Result of [`gs_witness_search`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessNet {
    pub point: GenPointGs,
    /// Window rows with `|u_ε(x_ε)| > ε^{m0}`.
    pub hits: usize,
    pub window: usize,
    pub samples: Vec<Sample>,
}

/// Grid argmax of `|u_ε|` per ε, kept when it exceeds `ε^{m0}` on at least
/// half of the asymptotic window.
pub fn gs_witness_search(
    u: &FunctionNet,
    k: &CompactBox,
    m0: u32,
    grid: &EpsGrid,
    cfg: &Config,
) -> Result<Option<WitnessNet>> {
    prepare(u, k, 0)?;
    let fam = net_family(u, k, &vec![0; u.n()], grid, cfg)?;
    let window = grid.asymptotic_window();
    let hits = fam.rows[window.clone()]
        .iter()
        .filter(|r| r.magnitude > eps_pow(r.eps, m0 as f64))
        .count();
    if 2 * hits < window.len() {
        return Ok(None);
    }
    let center = k.center();
    let coords = (0..u.n())
        .map(|i| {
            let entries = fam
                .rows
                .iter()
                .filter(|r| !r.point.is_empty())
                .map(|r| TableEntry {
                    generator: None,
                    eps: r.eps,
                    value: r.point[i],
                })
                .collect();
            Expr::table(center[i], entries)
        })
        .collect();
    Ok(Some(WitnessNet {
        point: GenPointGs {
            coords,
            support: Some(PointSupport {
                k: k.clone(),
                eta: 1.0,
            }),
        },
        hits,
        window: window.len(),
        samples: fam.samples(),
    }))
}

/// `Dũ = 0` versus `ũ ∈ ℂ̃`, reported as two independent verdicts.
pub fn gs_constant_check(
    u: &FunctionNet,
    k: &CompactBox,
    grid: &EpsGrid,
    cfg: &Config,
) -> Result<Verdict> {
    if !u.domain.connected {
        return Err(CoreError::Disconnected);
    }
    prepare(u, k, 1)?;
    let mut derivs = Vec::new();
    for i in 0..u.n() {
        derivs.push(gs_negligible_verdict(&u.derivative(i)?, k, grid, cfg)?);
    }
    let deriv_verdict = match derivs.iter().position(|v| !v.is_supported()) {
        None => Verdict::supported(cfg.m_max, None),
        Some(i) => derivs[i].clone(),
    };
    let spread = spread_verdict(u, k, grid, cfg)?;
    let mut v = match (deriv_verdict.is_supported(), spread.is_supported()) {
        (true, true) => Verdict::supported(cfg.m_max, None),
        (false, false) if deriv_verdict.is_refuted() => {
            let axis = derivs.iter().position(|v| !v.is_supported()).unwrap_or(0);
            deriv_verdict.clone().certify("axis", axis as i64)
        }
        _ => Verdict::inconclusive("derivative and spread verdicts disagree"),
    };
    v.components.clear();
    v.estimates.clear();
    for (i, d) in derivs.into_iter().enumerate() {
        v = v.component(format!("d{i}"), d);
    }
    Ok(v.component("spread", spread))
}

fn spread_verdict(
    u: &FunctionNet,
    k: &CompactBox,
    grid: &EpsGrid,
    cfg: &Config,
) -> Result<Verdict> {
    let sampling = sampling(k, cfg);
    let extremes: Vec<(Vec<f64>, Vec<f64>, f64)> = grid
        .values()
        .into_par_iter()
        .map(|eps| {
            let points = sampling.points(eps);
            let mut best_hi = (f64::NEG_INFINITY, 0);
            let mut best_lo = (f64::INFINITY, 0);
            for (j, x) in points.iter().enumerate() {
                let v = u.eval(eps, x);
                if v > best_hi.0 {
                    best_hi = (v, j);
                }
                if v < best_lo.0 {
                    best_lo = (v, j);
                }
            }
            let spread = (best_hi.0 - best_lo.0).abs();
            (points[best_hi.1].clone(), points[best_lo.1].clone(), spread)
        })
        .collect();
    let fam = Family {
        q: 0,
        label: "spread".into(),
        rows: grid
            .values()
            .into_iter()
            .zip(&extremes)
            .map(|(eps, (x, _, s))| Row {
                eps,
                magnitude: *s,
                point: x.clone(),
                skips: 0,
            })
            .collect(),
    };
    let cutoff = grid.window_cutoff();
    let estimate = sweep::estimate("spread".into(), &fam.samples(), grid);
    let mut v = match sweep::negligible_all_orders(std::slice::from_ref(&fam), cfg.m_max, cutoff)? {
        NegligibleOutcome::Supported(_) => Verdict::supported(cfg.m_max, None),
        NegligibleOutcome::Refuted {
            m, row, sequence, ..
        } => {
            let idx = fam
                .rows
                .iter()
                .position(|r| r.eps == row.eps)
                .expect("row from family");
            let (x, y, _) = &extremes[idx];
            Verdict::refuted(Witness {
                probe: Probe::NetSpread {
                    x: x.clone(),
                    y: y.clone(),
                },
                test_function: None,
                eps: row.eps,
                magnitude: row.magnitude,
                exponent: m as f64,
                relation: Relation::Above,
                sequence,
            })
        }
    };
    v.estimates.push(estimate);
    Ok(v)
}

/// Recompute a witness magnitude of a net.
pub fn replay_net(u: &FunctionNet, w: &Witness) -> Result<f64> {
    match &w.probe {
        Probe::Net { alpha, x } => Ok(u.derivative_value(w.eps, x, alpha).abs()),
        Probe::NetSpread { x, y } => Ok((u.eval(w.eps, x) - u.eval(w.eps, y)).abs()),
        other => Err(CoreError::InvalidArgument(format!(
            "probe {other:?} does not belong to a net"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> Arc<Domain> {
        Arc::new(Domain::interval(-2.0, 2.0).unwrap())
    }

    fn unit() -> CompactBox {
        CompactBox::new(vec![0.0], vec![1.0], 33).unwrap()
    }

    fn net(text: &str) -> FunctionNet {
        FunctionNet::parse(text, line()).unwrap()
    }

    #[test]
    fn moderate_examples() {
        let (g, cfg) = (EpsGrid::default(), Config::default());
        let v = gs_moderate_verdict(&net("sin(x)/eps"), &unit(), 0, &g, &cfg).unwrap();
        assert!(v.is_supported());
        assert_eq!(v.certificate("N"), Some(1));
        assert_eq!(v.estimates[0].estimate.as_ref().unwrap().slope, -1.0);
        let v = gs_moderate_verdict(&net("exp(1/eps)"), &unit(), 0, &g, &cfg).unwrap();
        assert!(v.is_refuted());
        let w = v.witness().unwrap();
        assert_eq!(replay_net(&net("exp(1/eps)"), w).unwrap(), w.magnitude);
    }

    #[test]
    fn negligible_boundary_is_inclusive() {
        let (g, cfg) = (EpsGrid::default(), Config::default());
        let v = gs_negligible_verdict(&net("eps^5*x"), &unit(), &g, &cfg).unwrap();
        assert!(v.is_refuted());
        assert_eq!(v.certificate("passed_up_to"), Some(5));
        assert_eq!(v.witness().unwrap().exponent, 6.0);
    }

    #[test]
    fn shifted_bump_negligibility_depends_on_k() {
        let (g, cfg) = (EpsGrid::default(), Config::default());
        let u = net("bump(2*(x/eps - 1))");
        let away = CompactBox::new(vec![0.25], vec![1.0], 33).unwrap();
        assert!(gs_negligible_verdict(&u, &away, &g, &cfg)
            .unwrap()
            .is_supported());
        let v = gs_negligible_verdict(&u, &unit(), &g, &cfg).unwrap();
        let w = v.witness().unwrap();
        assert_eq!(
            w.probe,
            Probe::Net {
                alpha: vec![0],
                x: vec![w.eps]
            }
        );
        assert_eq!(w.magnitude, (-1.0f64).exp());
    }

    #[test]
    fn point_evaluation() {
        let u = FunctionNet::parse("x^2", Arc::new(Domain::whole(1))).unwrap();
        let r = gs_point_eval(&u, &GenPointGs::constant(&[3.0])).unwrap();
        assert_eq!(r.eval(0.001), 9.0);
        let psi = net("bump(2*(x/eps - 1))");
        let x_eps = GenPointGs::new(
            vec![Expr::Eps],
            Some(PointSupport {
                k: unit(),
                eta: 1.0,
            }),
        )
        .unwrap();
        assert_eq!(
            gs_point_eval(&psi, &x_eps).unwrap().eval(2f64.powi(-20)),
            (-1.0f64).exp()
        );
        let fixed = gs_point_eval(&psi, &GenPointGs::constant(&[0.3])).unwrap();
        assert!(EpsGrid::default()
            .values()
            .iter()
            .filter(|&&e| e < 0.1)
            .all(|&e| fixed.eval(e) == 0.0));
        let bare = GenPointGs::new(vec![Expr::Eps], None).unwrap();
        assert_eq!(gs_point_eval(&psi, &bare), Err(CoreError::MissingSupport));
    }

    #[test]
    fn witness_search_examples() {
        let (g, cfg) = (EpsGrid::default(), Config::default());
        let psi = net("bump(2*(x/eps - 1))");
        let w = gs_witness_search(&psi, &unit(), 1, &g, &cfg)
            .unwrap()
            .unwrap();
        let value = gs_point_eval(&psi, &w.point).unwrap();
        for e in g.values() {
            assert_eq!(w.point.eval(e), vec![e]);
            assert_eq!(value.eval(e), (-1.0f64).exp());
        }
        assert!(gs_witness_search(&net("0"), &unit(), 1, &g, &cfg)
            .unwrap()
            .is_none());
        let lin = gs_witness_search(&net("eps*x"), &unit(), 2, &g, &cfg)
            .unwrap()
            .unwrap();
        assert_eq!(lin.point.eval(1e-3), vec![0.5]);
        assert_eq!(lin.point.eval(g.values()[20]), vec![1.0]);
    }

    #[test]
    fn constant_check_examples() {
        let g = EpsGrid::default();
        let cfg = Config {
            m_max: 5,
            ..Config::default()
        };
        assert!(gs_constant_check(&net("eps^-2"), &unit(), &g, &cfg)
            .unwrap()
            .is_supported());
        let v = gs_constant_check(&net("x"), &unit(), &g, &cfg).unwrap();
        assert!(v.is_refuted());
        assert!(v.components.iter().all(|c| c.verdict.is_refuted()));
        assert!(gs_constant_check(&net("eps^5*sin(x)"), &unit(), &g, &cfg)
            .unwrap()
            .is_supported());
        let split = Domain::new(vec![
            crate::testfn::OpenBox::new(vec![0.0], vec![1.0]).unwrap(),
            crate::testfn::OpenBox::new(vec![2.0], vec![3.0]).unwrap(),
        ])
        .unwrap();
        let u = FunctionNet::parse("x", Arc::new(split)).unwrap();
        let k = CompactBox::new(vec![0.25], vec![0.75], 5).unwrap();
        assert_eq!(
            gs_constant_check(&u, &k, &g, &cfg),
            Err(CoreError::Disconnected)
        );
    }

    #[test]
    fn derivatives_are_bounded_by_order() {
        let u = net("x^3");
        let d2 = u.derivative(0).unwrap().derivative(0).unwrap();
        assert_eq!(d2.eval(0.5, &[2.0]), 12.0);
        assert_eq!(d2.derivative(0), Err(CoreError::DerivativeOrderExhausted));
    }
}
