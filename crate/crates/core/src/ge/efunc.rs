//! Elements `R(φ, x)` of the base space, as operation trees.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::number::GenNumberGe;
use crate::error::{CoreError, Result};
use crate::expr::{EvalCtx, Expr};
use crate::jet::{univariate, Jet, JetSpace};
use crate::multiindex;
use crate::testfn::distribution::translated_pairing_jet;
use crate::testfn::{DistKind, DistributionSpec, Domain, TestFunction};

/// Derivative order available on a freshly built element.
pub const DEFAULT_EFUNC_ORDER: u32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ENode {
    /// `ι(u)(φ, x) = ⟨u, T_x φ⟩`.
    Embed {
        kind: DistKind,
    },
    /// Closed form in `x`, the scale tag `eps` and the generator tag.
    Formula {
        f: Expr,
    },
    /// `ρ(r)(φ, x) = r(φ)`.
    Rho {
        r: GenNumberGe,
    },
    Add {
        a: Arc<ENode>,
        b: Arc<ENode>,
    },
    Sub {
        a: Arc<ENode>,
        b: Arc<ENode>,
    },
    Mul {
        a: Arc<ENode>,
        b: Arc<ENode>,
    },
    Scale {
        c: f64,
        a: Arc<ENode>,
    },
    Derive {
        axis: usize,
        a: Arc<ENode>,
    },
    /// `1/R` where `R ≠ 0`, and `0` elsewhere.
    Invert {
        a: Arc<ENode>,
    },
}

pub(crate) fn tag_ctx<'a>(phi: &'a TestFunction, x: &'a [f64]) -> EvalCtx<'a> {
    EvalCtx {
        eps: phi.scale,
        x,
        generator: Some(phi.id()),
        translated: phi.shift.iter().any(|&s| s != 0.0),
    }
}

impl ENode {
    /// Jet in `x` of `R(φ, ·)` at `x`, up to `order`.
    fn jet(&self, phi: &TestFunction, x: &[f64], space: &Arc<JetSpace>) -> Jet<f64> {
        match self {
            ENode::Embed { kind } => translated_pairing_jet(kind, phi, x, space.order),
            ENode::Formula { f } => f.eval_jet(&tag_ctx(phi, x), space),
            ENode::Rho { r } => Jet::constant(space, r.eval(phi)),
            ENode::Add { a, b } => a.jet(phi, x, space).add(&b.jet(phi, x, space)),
            ENode::Sub { a, b } => a.jet(phi, x, space).sub(&b.jet(phi, x, space)),
            ENode::Mul { a, b } => a.jet(phi, x, space).mul(&b.jet(phi, x, space)),
            ENode::Scale { c, a } => a.jet(phi, x, space).scale(*c),
            ENode::Derive { axis, a } => {
                let up = JetSpace::get(space.n, space.order + 1);
                a.jet(phi, x, &up).partial(*axis)
            }
            ENode::Invert { a } => {
                let inner = a.jet(phi, x, space);
                if inner.value() == 0.0 {
                    Jet::constant(space, 0.0)
                } else {
                    inner.compose(&univariate::reciprocal(inner.value(), space.order))
                }
            }
        }
    }
}

/// `R: U(Ω) → ℝ`, smooth in the point variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EFunc {
    pub node: Arc<ENode>,
    pub domain: Arc<Domain>,
    /// Remaining derivative order.
    pub budget: u32,
}

impl EFunc {
    fn leaf(node: ENode, domain: Arc<Domain>) -> Self {
        EFunc {
            node: Arc::new(node),
            domain,
            budget: DEFAULT_EFUNC_ORDER,
        }
    }

    pub fn embed(u: &DistributionSpec) -> Self {
        Self::leaf(
            ENode::Embed {
                kind: u.kind.clone(),
            },
            u.domain.clone(),
        )
    }

    pub fn formula(f: Expr, domain: Arc<Domain>) -> Result<Self> {
        if f.var_bound() > domain.n {
            return Err(CoreError::DimensionMismatch {
                expected: domain.n,
                found: f.var_bound(),
            });
        }
        Ok(Self::leaf(ENode::Formula { f }, domain))
    }

    pub fn rho(r: &GenNumberGe, domain: Arc<Domain>) -> Self {
        Self::leaf(ENode::Rho { r: r.clone() }, domain)
    }

    pub fn constant(c: f64, domain: Arc<Domain>) -> Self {
        Self::leaf(ENode::Formula { f: Expr::c(c) }, domain)
    }

    pub fn with_budget(mut self, d: u32) -> Self {
        self.budget = d;
        self
    }

    pub fn n(&self) -> usize {
        self.domain.n
    }

    fn combine(&self, other: &Self, f: impl Fn(Arc<ENode>, Arc<ENode>) -> ENode) -> Result<Self> {
        if *self.domain != *other.domain {
            return Err(CoreError::InvalidArgument(
                "elements live on different domains".into(),
            ));
        }
        Ok(EFunc {
            node: Arc::new(f(self.node.clone(), other.node.clone())),
            domain: self.domain.clone(),
            budget: self.budget.min(other.budget),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| ENode::Add { a, b })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| ENode::Sub { a, b })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| ENode::Mul { a, b })
    }

    pub fn scale(&self, c: f64) -> Self {
        EFunc {
            node: Arc::new(ENode::Scale {
                c,
                a: self.node.clone(),
            }),
            ..self.clone()
        }
    }

    /// `D_i R = ∂_i R`, consuming one order of the derivative budget.
    pub fn derive(&self, axis: usize) -> Result<Self> {
        if axis >= self.n() {
            return Err(CoreError::InvalidArgument(format!(
                "axis {axis} out of range"
            )));
        }
        if self.budget == 0 {
            return Err(CoreError::DerivativeOrderExhausted);
        }
        Ok(EFunc {
            node: Arc::new(ENode::Derive {
                axis,
                a: self.node.clone(),
            }),
            domain: self.domain.clone(),
            budget: self.budget - 1,
        })
    }

    /// `S(φ, x) = 1/R(φ, x)` where defined, `0` elsewhere.
    pub fn invert(&self) -> Self {
        EFunc {
            node: Arc::new(ENode::Invert {
                a: self.node.clone(),
            }),
            ..self.clone()
        }
    }

    /// The `U(Ω)` condition `supp φ + x ⊆ Ω`.
    pub fn guard(&self, phi: &TestFunction, x: &[f64]) -> bool {
        let center: Vec<f64> = phi.shift.iter().zip(x).map(|(s, v)| s + v).collect();
        self.domain.contains_ball(&center, phi.support_radius())
    }

    /// `∂^α R(φ, x)` on `U(Ω)`, `None` outside it.
    pub fn eval(&self, phi: &TestFunction, x: &[f64], alpha: &[u32]) -> Result<Option<f64>> {
        if phi.n() != self.n() || x.len() != self.n() || alpha.len() != self.n() {
            return Err(CoreError::DimensionMismatch {
                expected: self.n(),
                found: if phi.n() != self.n() {
                    phi.n()
                } else {
                    x.len().min(alpha.len())
                },
            });
        }
        let order = multiindex::degree(alpha);
        if order > self.budget {
            return Err(CoreError::DerivativeOrderExhausted);
        }
        if !self.guard(phi, x) {
            return Ok(None);
        }
        let space = JetSpace::get(self.n(), order);
        Ok(Some(self.node.jet(phi, x, &space).derivative(alpha)))
    }

    /// `R(φ, x)` without the guard; callers check [`EFunc::guard`].
    pub fn value_unguarded(&self, phi: &TestFunction, x: &[f64]) -> f64 {
        let space = JetSpace::get(self.n(), 0);
        self.node.jet(phi, x, &space).value()
    }

    /// `R(φ, x)` with the guard.
    pub fn value(&self, phi: &TestFunction, x: &[f64]) -> Result<Option<f64>> {
        self.eval(phi, x, &vec![0; self.n()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfn::{make_bump, make_moment_testfn};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line() -> Arc<Domain> {
        Arc::new(Domain::interval(-3.0, 3.0).unwrap())
    }

    #[test]
    fn delta_values() {
        let d = EFunc::embed(&DistributionSpec::delta(line()));
        let phi = make_bump(1, 1.0).unwrap();
        let psi0 = phi.eval(&[0.0]);
        for k in 4..20 {
            let eps = 2f64.powi(-k);
            let v = d.value(&phi.scaled(eps).unwrap(), &[0.0]).unwrap().unwrap();
            assert_eq!(v, psi0 / eps);
            let sq = d
                .mul(&d)
                .unwrap()
                .value(&phi.scaled(eps).unwrap(), &[0.0])
                .unwrap()
                .unwrap();
            assert_eq!(sq, (psi0 / eps) * (psi0 / eps));
        }
    }

    #[test]
    fn derivative_of_heaviside_is_delta() {
        let h = EFunc::embed(&DistributionSpec::heaviside(line()).unwrap());
        let d = EFunc::embed(&DistributionSpec::delta(line()));
        let dh = h.derive(0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let q = rng.random_range(0..5);
            let eps = rng.random_range(0.05..0.5);
            let x = rng.random_range(-1.0..1.0);
            let phi = make_moment_testfn(1, q, 1, 1.0)
                .unwrap()
                .scaled(eps)
                .unwrap();
            let a = dh.value(&phi, &[x]).unwrap().unwrap();
            let b = d.value(&phi, &[x]).unwrap().unwrap();
            assert_relative_eq!(a, b, epsilon = 1e-9, max_relative = 1e-9);
        }
    }

    #[test]
    fn guard_and_budget() {
        let d = EFunc::embed(&DistributionSpec::delta(line()));
        let wide = make_bump(1, 1.0).unwrap();
        assert_eq!(d.value(&wide, &[2.5]).unwrap(), None);
        assert!(d.value(&wide, &[1.5]).unwrap().is_some());
        let dd = d.derive(0).unwrap().derive(0).unwrap();
        assert_eq!(dd.derive(0), Err(CoreError::DerivativeOrderExhausted));
        assert_eq!(
            d.eval(&wide, &[0.0], &[3]),
            Err(CoreError::DerivativeOrderExhausted)
        );
    }

    #[test]
    fn inversion_is_exact_where_nonzero() {
        let f = EFunc::formula(Expr::parse("x").unwrap(), line()).unwrap();
        let inv = f.invert();
        let phi = make_bump(1, 1.0).unwrap().scaled(0.01).unwrap();
        assert_eq!(inv.value(&phi, &[0.0]).unwrap(), Some(0.0));
        assert_eq!(inv.value(&phi, &[0.25]).unwrap(), Some(4.0));
        assert_eq!(inv.eval(&phi, &[0.5], &[1]).unwrap(), Some(-4.0));
        assert_eq!(
            f.mul(&inv).unwrap().value(&phi, &[0.25]).unwrap(),
            Some(1.0)
        );
    }
}
