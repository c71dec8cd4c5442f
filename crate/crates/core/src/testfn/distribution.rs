//! Distributions of the supported kinds and their action on test functions.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::domain::Domain;
use super::generator::TestFunction;
use super::quadrature::{gauss_legendre, Accumulator};
use crate::error::{CoreError, Result};
use crate::expr::{EvalCtx, Expr};
use crate::jet::{Jet, JetSpace};
use crate::multiindex::{self, MultiIndex};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistKind {
    /// The smooth function `∂^α f`.
    Smooth {
        f: Expr,
        alpha: MultiIndex,
    },
    /// `∂^α δ`.
    Delta {
        alpha: MultiIndex,
    },
    /// Heaviside function on the line.
    Heaviside,
    /// `∂^α f` for a locally integrable `f`, paired by quadrature.
    LocallyIntegrable {
        f: Expr,
        alpha: MultiIndex,
    },
    Combination {
        terms: Vec<(f64, DistKind)>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub kind: DistKind,
    pub domain: Arc<Domain>,
}

impl DistributionSpec {
    pub fn new(kind: DistKind, domain: Arc<Domain>) -> Result<Self> {
        check_kind(&kind, domain.n)?;
        Ok(DistributionSpec { kind, domain })
    }

    pub fn delta(domain: Arc<Domain>) -> Self {
        let n = domain.n;
        DistributionSpec {
            kind: DistKind::Delta { alpha: vec![0; n] },
            domain,
        }
    }

    pub fn heaviside(domain: Arc<Domain>) -> Result<Self> {
        Self::new(DistKind::Heaviside, domain)
    }

    pub fn smooth(f: Expr, domain: Arc<Domain>) -> Result<Self> {
        let n = domain.n;
        Self::new(
            DistKind::Smooth {
                f,
                alpha: vec![0; n],
            },
            domain,
        )
    }

    pub fn locally_integrable(f: Expr, domain: Arc<Domain>) -> Result<Self> {
        let n = domain.n;
        Self::new(
            DistKind::LocallyIntegrable {
                f,
                alpha: vec![0; n],
            },
            domain,
        )
    }

    pub fn n(&self) -> usize {
        self.domain.n
    }

    pub fn derivative(&self, i: usize) -> Result<Self> {
        if i >= self.n() {
            return Err(CoreError::InvalidArgument(format!("axis {i} out of range")));
        }
        Ok(DistributionSpec {
            kind: self.kind.derivative(i, self.n()),
            domain: self.domain.clone(),
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        DistributionSpec {
            kind: DistKind::Combination {
                terms: vec![(1.0, self.kind.clone()), (1.0, other.kind.clone())],
            },
            domain: self.domain.clone(),
        }
    }

    /// `⟨u, ψ⟩` with the support guard `supp ψ ⊆ Ω`.
    pub fn pair(&self, psi: &TestFunction) -> Result<Complex64> {
        if psi.n() != self.n() {
            return Err(CoreError::DimensionMismatch {
                expected: self.n(),
                found: psi.n(),
            });
        }
        if !self.domain.contains_ball(&psi.shift, psi.support_radius()) {
            return Err(CoreError::DomainGuard {
                center: psi.shift.clone(),
                radius: psi.support_radius(),
            });
        }
        let zero = vec![0.0; self.n()];
        Ok(Complex64::new(
            translated_pairing(&self.kind, psi, &zero),
            0.0,
        ))
    }
}

fn check_kind(kind: &DistKind, n: usize) -> Result<()> {
    let check_alpha = |a: &MultiIndex| {
        if a.len() != n {
            Err(CoreError::DimensionMismatch {
                expected: n,
                found: a.len(),
            })
        } else {
            Ok(())
        }
    };
    let check_expr = |f: &Expr| {
        if f.var_bound() > n {
            Err(CoreError::DimensionMismatch {
                expected: n,
                found: f.var_bound(),
            })
        } else if f.uses_tags() {
            Err(CoreError::InvalidArgument(
                "distribution formulas may not read eps or generator tags".into(),
            ))
        } else {
            Ok(())
        }
    };
    match kind {
        DistKind::Smooth { f, alpha } | DistKind::LocallyIntegrable { f, alpha } => {
            check_alpha(alpha)?;
            check_expr(f)
        }
        DistKind::Delta { alpha } => check_alpha(alpha),
        DistKind::Heaviside => {
            if n == 1 {
                Ok(())
            } else {
                Err(CoreError::Unsupported(
                    "Heaviside is one-dimensional".into(),
                ))
            }
        }
        DistKind::Combination { terms } => terms.iter().try_for_each(|(_, k)| check_kind(k, n)),
    }
}

impl DistKind {
    pub fn derivative(&self, i: usize, n: usize) -> DistKind {
        let bump = |a: &MultiIndex| {
            let mut b = a.clone();
            b[i] += 1;
            b
        };
        match self {
            DistKind::Smooth { f, alpha } => DistKind::Smooth {
                f: f.clone(),
                alpha: bump(alpha),
            },
            DistKind::LocallyIntegrable { f, alpha } => DistKind::LocallyIntegrable {
                f: f.clone(),
                alpha: bump(alpha),
            },
            DistKind::Delta { alpha } => DistKind::Delta { alpha: bump(alpha) },
            DistKind::Heaviside => DistKind::Delta { alpha: vec![0; n] },
            DistKind::Combination { terms } => DistKind::Combination {
                terms: terms
                    .iter()
                    .map(|(c, k)| (*c, k.derivative(i, n)))
                    .collect(),
            },
        }
    }
}

/// `⟨u, T_x φ⟩`.
pub fn translated_pairing(kind: &DistKind, phi: &TestFunction, x: &[f64]) -> f64 {
    let n = phi.n();
    let z: Vec<f64> = x.iter().zip(&phi.shift).map(|(a, b)| a + b).collect();
    let eps = phi.scale;
    let g = &phi.generator;
    match kind {
        DistKind::Delta { alpha } => {
            let at: Vec<f64> = z.iter().map(|v| -v / eps).collect();
            let k = multiindex::degree(alpha);
            sign(k) * eps.powi(-((n as u32 + k) as i32)) * g.derivative(&at, alpha)
        }
        DistKind::Heaviside => tail_integral(phi, -z[0] / eps),
        DistKind::Smooth { f, alpha } => {
            if let Some(p) = f.to_polynomial(n) {
                return polynomial_pairing(&p.derivative(alpha), phi, &z);
            }
            let mut y = vec![0.0; n];
            g.integrate(|v| {
                for i in 0..n {
                    y[i] = z[i] + eps * v[i];
                }
                f.derivative_at(&EvalCtx::at(1.0, &y), alpha)
            })
        }
        DistKind::LocallyIntegrable { f, alpha } => {
            let k = multiindex::degree(alpha);
            let (points, wg) = g.quadrature();
            let weights = if k == 0 {
                None
            } else {
                Some(quadrature_weights(phi))
            };
            let mut acc = Accumulator::default();
            let mut y = vec![0.0; n];
            for (idx, v) in points.iter().enumerate() {
                for i in 0..n {
                    y[i] = z[i] + eps * v[i];
                }
                let fy = f.eval(&EvalCtx::at(1.0, &y));
                let term = match &weights {
                    None => wg[idx] * fy,
                    Some(w) => {
                        if w[idx] == 0.0 {
                            continue;
                        }
                        w[idx] * g.derivative(v, alpha) * fy
                    }
                };
                acc.add(term);
            }
            sign(k) * eps.powi(-(k as i32)) * acc.total()
        }
        DistKind::Combination { terms } => terms
            .iter()
            .map(|(c, k)| c * translated_pairing(k, phi, x))
            .sum(),
    }
}

/// Jet in `x` of `x ↦ ⟨u, T_x φ⟩`, truncated at `order`.
pub fn translated_pairing_jet(
    kind: &DistKind,
    phi: &TestFunction,
    x: &[f64],
    order: u32,
) -> Jet<f64> {
    let n = phi.n();
    let space = JetSpace::get(n, order);
    if order == 0 {
        return Jet::constant(&space, translated_pairing(kind, phi, x));
    }
    let z: Vec<f64> = x.iter().zip(&phi.shift).map(|(a, b)| a + b).collect();
    let eps = phi.scale;
    let g = &phi.generator;
    let mut out = Jet::constant(&space, 0.0);
    match kind {
        DistKind::Delta { alpha } => {
            let at: Vec<f64> = z.iter().map(|v| -v / eps).collect();
            let k = multiindex::degree(alpha);
            let gj = g.jet(&at, k + order);
            for (idx, beta) in space.indices.iter().enumerate() {
                let ab = multiindex::add(alpha, beta);
                let b = multiindex::degree(beta);
                out.coeffs[idx] =
                    sign(k + b) * eps.powi(-((n as u32 + k + b) as i32)) * gj.derivative(&ab)
                        / multiindex::factorial(beta);
            }
        }
        DistKind::Heaviside => {
            let at = -z[0] / eps;
            out.coeffs[0] = tail_integral(phi, at);
            let gj = g.jet(&[at], order - 1);
            for j in 1..=order {
                // d^j/dx^j = (-1)^{j-1} ε^{-j} g^{(j-1)}(-z/ε)
                let d = sign(j - 1) * eps.powi(-(j as i32)) * gj.derivative(&[j - 1]);
                out.coeffs[j as usize] = d / multiindex::factorial(&[j]);
            }
        }
        DistKind::Smooth { f, alpha } => {
            if let Some(p) = f.to_polynomial(n) {
                let base = p.derivative(alpha);
                for (idx, beta) in space.indices.iter().enumerate() {
                    out.coeffs[idx] = polynomial_pairing(&base.derivative(beta), phi, &z)
                        / multiindex::factorial(beta);
                }
                return out;
            }
            let k = multiindex::degree(alpha);
            let big = JetSpace::get(n, k + order);
            let (points, wg) = g.quadrature();
            let mut accs = vec![Accumulator::default(); space.len()];
            let mut y = vec![0.0; n];
            for (v, w) in points.iter().zip(wg) {
                if *w == 0.0 {
                    continue;
                }
                for i in 0..n {
                    y[i] = z[i] + eps * v[i];
                }
                let fj = f.eval_jet(&EvalCtx::at(1.0, &y), &big);
                for (idx, beta) in space.indices.iter().enumerate() {
                    accs[idx].add(w * fj.derivative(&multiindex::add(alpha, beta)));
                }
            }
            for (idx, beta) in space.indices.iter().enumerate() {
                out.coeffs[idx] = accs[idx].total() / multiindex::factorial(beta);
            }
        }
        DistKind::LocallyIntegrable { f, alpha } => {
            let k = multiindex::degree(alpha);
            let (points, _) = g.quadrature();
            let weights = quadrature_weights(phi);
            let mut accs = vec![Accumulator::default(); space.len()];
            let mut y = vec![0.0; n];
            for (idx_p, v) in points.iter().enumerate() {
                if weights[idx_p] == 0.0 {
                    continue;
                }
                for i in 0..n {
                    y[i] = z[i] + eps * v[i];
                }
                let fy = f.eval(&EvalCtx::at(1.0, &y));
                let gj = g.jet(v, k + order);
                for (idx, beta) in space.indices.iter().enumerate() {
                    let ab = multiindex::add(alpha, beta);
                    accs[idx].add(weights[idx_p] * gj.derivative(&ab) * fy);
                }
            }
            for (idx, beta) in space.indices.iter().enumerate() {
                let b = multiindex::degree(beta);
                out.coeffs[idx] = sign(k + b) * eps.powi(-((k + b) as i32)) * accs[idx].total()
                    / multiindex::factorial(beta);
            }
        }
        DistKind::Combination { terms } => {
            for (c, k) in terms {
                out = out.add(&translated_pairing_jet(k, phi, x, order).scale(*c));
            }
        }
    }
    out
}

fn sign(k: u32) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Plain quadrature weights of the generator rule (without the generator value).
fn quadrature_weights(phi: &TestFunction) -> Vec<f64> {
    let g = &phi.generator;
    let (points, _) = g.quadrature();
    let rule = gauss_legendre(g.nodes);
    let half = g.rho;
    let n = g.n;
    let total = points.len();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        let w: f64 = idx.iter().map(|&i| half * rule.weights[i]).product();
        out.push(w);
        for d in (0..n).rev() {
            idx[d] += 1;
            if idx[d] < g.nodes {
                break;
            }
            idx[d] = 0;
        }
    }
    out
}

/// `∫_c^∞ g` for the generator of `phi` (one-dimensional).
fn tail_integral(phi: &TestFunction, c: f64) -> f64 {
    let g = &phi.generator;
    let rho = g.rho;
    if c <= -rho {
        return g.moment(&[0]);
    }
    if c >= rho {
        return 0.0;
    }
    let rule = gauss_legendre(g.nodes);
    let (mid, half) = ((c + rho) / 2.0, (rho - c) / 2.0);
    let mut acc = Accumulator::default();
    for (t, w) in rule.nodes.iter().zip(&rule.weights) {
        acc.add(w * g.eval(&[mid + half * t]));
    }
    half * acc.total()
}

/// `∫ P(z + ε v) g(v) dv` through the generator moments.
fn polynomial_pairing(p: &crate::expr::Polynomial, phi: &TestFunction, z: &[f64]) -> f64 {
    let eps = phi.scale;
    let g = &phi.generator;
    let mut acc = Accumulator::default();
    for (gamma, coef) in &p.terms {
        for kappa in sub_indices(gamma) {
            let mut term = *coef;
            for i in 0..gamma.len() {
                term *= binomial(gamma[i], kappa[i]) * z[i].powi((gamma[i] - kappa[i]) as i32);
            }
            let m = g.moment(&kappa);
            if m == 0.0 || term == 0.0 {
                continue;
            }
            acc.add(term * eps.powi(multiindex::degree(&kappa) as i32) * m);
        }
    }
    acc.total()
}

fn sub_indices(gamma: &[u32]) -> Vec<MultiIndex> {
    let mut out = vec![Vec::new()];
    for &g in gamma {
        let mut next = Vec::new();
        for p in &out {
            for k in 0..=g {
                let mut q = p.clone();
                q.push(k);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
