//! Generalized numbers `r(φ)`, compactly supported generalized points
//! `X(φ)` and square matrices over generalized numbers.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::efunc::{tag_ctx, EFunc};
use crate::error::{CoreError, Result};
use crate::expr::Expr;
use crate::testfn::{CompactBox, TestFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum NumNode {
    /// Closed form in the scale tag `eps` and the generator tag.
    Expr {
        f: Expr,
    },
    Add {
        a: Arc<NumNode>,
        b: Arc<NumNode>,
    },
    Sub {
        a: Arc<NumNode>,
        b: Arc<NumNode>,
    },
    Mul {
        a: Arc<NumNode>,
        b: Arc<NumNode>,
    },
    Neg {
        a: Arc<NumNode>,
    },
    /// `1/r` where `r ≠ 0`, `0` elsewhere.
    Recip {
        a: Arc<NumNode>,
    },
    /// `1` where `r = 0`, `0` elsewhere.
    ZeroInd {
        a: Arc<NumNode>,
    },
    /// `R(X)(φ) = R(φ, X(φ))` on `U(Ω)`, `0` otherwise.
    PointValue {
        r: Box<EFunc>,
        x: GenPointGe,
    },
}

impl NumNode {
    fn eval(&self, phi: &TestFunction) -> f64 {
        match self {
            NumNode::Expr { f } => f.eval(&tag_ctx(phi, &[])),
            NumNode::Add { a, b } => a.eval(phi) + b.eval(phi),
            NumNode::Sub { a, b } => a.eval(phi) - b.eval(phi),
            NumNode::Mul { a, b } => a.eval(phi) * b.eval(phi),
            NumNode::Neg { a } => -a.eval(phi),
            NumNode::Recip { a } => {
                let v = a.eval(phi);
                if v == 0.0 {
                    0.0
                } else {
                    1.0 / v
                }
            }
            NumNode::ZeroInd { a } => {
                if a.eval(phi) == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            NumNode::PointValue { r, x } => {
                let at = x.eval(phi);
                if r.guard(phi, &at) {
                    r.value_unguarded(phi, &at)
                } else {
                    0.0
                }
            }
        }
    }
}

/// `r: A_0(ℝⁿ) → ℝ`, total on test functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GenNumberGe {
    pub node: Arc<NumNode>,
}

impl GenNumberGe {
    fn wrap(node: NumNode) -> Self {
        GenNumberGe {
            node: Arc::new(node),
        }
    }

    pub fn expr(f: Expr) -> Result<Self> {
        if f.uses_vars() {
            return Err(CoreError::InvalidArgument(format!(
                "number {f} reads point variables"
            )));
        }
        Ok(Self::wrap(NumNode::Expr { f }))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::expr(Expr::parse(text)?)
    }

    pub fn constant(c: f64) -> Self {
        Self::wrap(NumNode::Expr { f: Expr::c(c) })
    }

    /// `φ ↦ scale of φ`.
    pub fn scale_of() -> Self {
        Self::wrap(NumNode::Expr { f: Expr::Eps })
    }

    pub fn eval(&self, phi: &TestFunction) -> f64 {
        self.node.eval(phi)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::wrap(NumNode::Add {
            a: self.node.clone(),
            b: other.node.clone(),
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::wrap(NumNode::Sub {
            a: self.node.clone(),
            b: other.node.clone(),
        })
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::wrap(NumNode::Mul {
            a: self.node.clone(),
            b: other.node.clone(),
        })
    }

    pub fn neg(&self) -> Self {
        Self::wrap(NumNode::Neg {
            a: self.node.clone(),
        })
    }

    /// `s(φ) = 1/r(φ)` where defined, `0` elsewhere.
    pub fn invert(&self) -> Self {
        Self::wrap(NumNode::Recip {
            a: self.node.clone(),
        })
    }

    /// `s(φ) = 1` if `r(φ) = 0`, `0` otherwise; `r·s ≡ 0`.
    pub fn zero_divisor_partner(&self) -> Self {
        Self::wrap(NumNode::ZeroInd {
            a: self.node.clone(),
        })
    }

    /// `R(X)`.
    pub fn point_value(r: &EFunc, x: &GenPointGe) -> Result<Self> {
        if r.n() != x.n() {
            return Err(CoreError::DimensionMismatch {
                expected: r.n(),
                found: x.n(),
            });
        }
        r.domain.check_compact(&x.support)?;
        Ok(Self::wrap(NumNode::PointValue {
            r: Box::new(r.clone()),
            x: x.clone(),
        }))
    }
}

pub fn invert_number(r: &GenNumberGe) -> GenNumberGe {
    r.invert()
}

pub fn zero_divisor_partner(r: &GenNumberGe) -> GenNumberGe {
    r.zero_divisor_partner()
}

/// `X: A_0(ℝⁿ) → K`, one tag closed form per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenPointGe {
    pub coords: Vec<Expr>,
    pub support: CompactBox,
}

impl GenPointGe {
    pub fn new(coords: Vec<Expr>, support: CompactBox) -> Result<Self> {
        if let Some(c) = coords.iter().find(|c| c.uses_vars()) {
            return Err(CoreError::InvalidArgument(format!(
                "point coordinate {c} reads point variables"
            )));
        }
        if support.n() != coords.len() {
            return Err(CoreError::DimensionMismatch {
                expected: coords.len(),
                found: support.n(),
            });
        }
        Ok(GenPointGe { coords, support })
    }

    pub fn constant(x: &[f64]) -> Self {
        GenPointGe {
            coords: x.iter().map(|&v| Expr::c(v)).collect(),
            support: CompactBox::point(x.to_vec()),
        }
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn eval(&self, phi: &TestFunction) -> Vec<f64> {
        let ctx = tag_ctx(phi, &[]);
        self.coords.iter().map(|c| c.eval(&ctx)).collect()
    }

    /// `X(φ)`, checked against the support box.
    pub fn eval_checked(&self, phi: &TestFunction) -> Result<Vec<f64>> {
        let x = self.eval(phi);
        if self.support.contains(&x) {
            Ok(x)
        } else {
            Err(CoreError::InvalidArgument(format!(
                "point value {x:?} at {:?} leaves its support box",
                phi.tag()
            )))
        }
    }
}

/// Square matrix over generalized numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixGe {
    pub entries: Vec<Vec<GenNumberGe>>,
}

/// Largest size handled by cofactor expansion.
pub const MAX_COFACTOR_SIZE: usize = 6;

impl MatrixGe {
    pub fn new(entries: Vec<Vec<GenNumberGe>>) -> Result<Self> {
        let m = entries.len();
        if m == 0 || entries.iter().any(|row| row.len() != m) {
            return Err(CoreError::NotSquare);
        }
        Ok(MatrixGe { entries })
    }

    pub fn identity(m: usize) -> Self {
        MatrixGe {
            entries: (0..m)
                .map(|i| {
                    (0..m)
                        .map(|j| GenNumberGe::constant(if i == j { 1.0 } else { 0.0 }))
                        .collect()
                })
                .collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    fn minor(&self, row: usize, col: usize) -> MatrixGe {
        MatrixGe {
            entries: self
                .entries
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != row)
                .map(|(_, r)| {
                    r.iter()
                        .enumerate()
                        .filter(|(j, _)| *j != col)
                        .map(|(_, v)| v.clone())
                        .collect()
                })
                .collect(),
        }
    }

    fn det_unchecked(&self) -> GenNumberGe {
        let m = self.size();
        if m == 1 {
            return self.entries[0][0].clone();
        }
        let mut acc: Option<GenNumberGe> = None;
        for j in 0..m {
            let term = self.entries[0][j].mul(&self.minor(0, j).det_unchecked());
            acc = Some(match acc {
                None if j % 2 == 0 => term,
                None => term.neg(),
                Some(a) if j % 2 == 0 => a.add(&term),
                Some(a) => a.sub(&term),
            });
        }
        acc.expect("non-empty matrix")
    }

    fn check_size(&self) -> Result<()> {
        if self.size() > MAX_COFACTOR_SIZE {
            Err(CoreError::MatrixTooLarge(self.size()))
        } else {
            Ok(())
        }
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> Result<GenNumberGe> {
        self.check_size()?;
        Ok(self.det_unchecked())
    }

    /// Transposed cofactor matrix.
    pub fn adjugate(&self) -> Result<MatrixGe> {
        self.check_size()?;
        let m = self.size();
        if m == 1 {
            return Ok(MatrixGe::identity(1));
        }
        let entries = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        let c = self.minor(j, i).det_unchecked();
                        if (i + j) % 2 == 0 {
                            c
                        } else {
                            c.neg()
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(MatrixGe { entries })
    }

    /// `adj(A) · (det A)^{-1}`.
    pub fn adjugate_inverse(&self) -> Result<MatrixGe> {
        let inv = self.det()?.invert();
        let adj = self.adjugate()?;
        Ok(MatrixGe {
            entries: adj
                .entries
                .iter()
                .map(|row| row.iter().map(|v| v.mul(&inv)).collect())
                .collect(),
        })
    }

    pub fn mul(&self, other: &MatrixGe) -> Result<MatrixGe> {
        if self.size() != other.size() {
            return Err(CoreError::DimensionMismatch {
                expected: self.size(),
                found: other.size(),
            });
        }
        let m = self.size();
        let entries = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        (1..m).fold(self.entries[i][0].mul(&other.entries[0][j]), |acc, k| {
                            acc.add(&self.entries[i][k].mul(&other.entries[k][j]))
                        })
                    })
                    .collect()
            })
            .collect();
        Ok(MatrixGe { entries })
    }

    pub fn eval(&self, phi: &TestFunction) -> Vec<Vec<f64>> {
        self.entries
            .iter()
            .map(|row| row.iter().map(|v| v.eval(phi)).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::TableEntry;
    use crate::testfn::{make_bump, make_moment_testfn, DistributionSpec, Domain};

    fn e() -> GenNumberGe {
        GenNumberGe::scale_of()
    }

    #[test]
    fn tag_reads_and_inverses() {
        let phi = make_moment_testfn(1, 2, 1, 1.0).unwrap();
        for k in 1..30 {
            let s = phi.scaled(2f64.powi(-k)).unwrap();
            assert_eq!(e().eval(&s), 2f64.powi(-k));
            assert_eq!(e().mul(&e().invert()).eval(&s), 1.0);
        }
        let r = GenNumberGe::parse("eps*(1 - dyadic(eps))").unwrap();
        let s = r.zero_divisor_partner();
        let dy = phi.scaled(0.125).unwrap();
        let odd = phi.scaled(0.3).unwrap();
        assert_eq!((r.eval(&dy), s.eval(&dy)), (0.0, 1.0));
        assert_eq!((r.eval(&odd), s.eval(&odd)), (0.3, 0.0));
        assert_eq!(r.mul(&s).eval(&dy), 0.0);
        assert_eq!(e().zero_divisor_partner().eval(&odd), 0.0);
    }

    #[test]
    fn nested_scaling_reads_the_product() {
        let phi = make_moment_testfn(1, 3, 1, 1.0).unwrap();
        let x = GenPointGe::new(
            vec![Expr::table(
                0.5,
                vec![TableEntry {
                    generator: Some(phi.id().to_string()),
                    eps: 2f64.powi(-7),
                    value: 0.0,
                }],
            )],
            CompactBox::interval(0.0, 1.0).unwrap(),
        )
        .unwrap();
        let nested = phi.scaled(0.25).unwrap().scaled(2f64.powi(-5)).unwrap();
        assert_eq!(x.eval(&nested), vec![0.0]);
        assert_eq!(x.eval(&phi.scaled(2f64.powi(-6)).unwrap()), vec![0.5]);
        assert_eq!(
            x.eval(&make_bump(1, 1.0).unwrap().scaled(2f64.powi(-7)).unwrap()),
            vec![0.5]
        );
        assert_eq!(
            x.eval(&phi.scaled(2f64.powi(-7)).unwrap().translated(&[0.1])),
            vec![0.5]
        );
    }

    #[test]
    fn point_value_uses_the_zero_branch() {
        let line = Arc::new(Domain::interval(-1.0, 1.0).unwrap());
        let h = EFunc::embed(&DistributionSpec::heaviside(line).unwrap());
        let x = GenPointGe::constant(&[0.5]);
        let rx = GenNumberGe::point_value(&h, &x).unwrap();
        let phi = make_bump(1, 1.0).unwrap();
        assert_eq!(rx.eval(&phi), 0.0);
        assert_eq!(rx.eval(&phi.scaled(1.0 / 64.0).unwrap()), 1.0);
    }

    #[test]
    fn matrices() {
        let a = MatrixGe::new(vec![
            vec![e(), GenNumberGe::constant(0.0)],
            vec![GenNumberGe::constant(0.0), e()],
        ])
        .unwrap();
        let phi = make_moment_testfn(1, 1, 1, 1.0).unwrap();
        let prod = a.mul(&a.adjugate_inverse().unwrap()).unwrap();
        for k in 4..37 {
            let s = phi.scaled(2f64.powi(-k)).unwrap();
            assert_eq!(a.det().unwrap().eval(&s), 2f64.powi(-2 * k));
            assert_eq!(prod.eval(&s), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        }
        let three = MatrixGe::new(
            [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]]
                .iter()
                .map(|r| r.iter().map(|&v| GenNumberGe::constant(v)).collect())
                .collect(),
        )
        .unwrap();
        let s = phi.scaled(0.5).unwrap();
        assert_eq!(three.det().unwrap().eval(&s), 18.0);
        let cramer = three.mul(&three.adjugate().unwrap()).unwrap().eval(&s);
        assert_eq!(
            cramer,
            vec![
                vec![18.0, 0.0, 0.0],
                vec![0.0, 18.0, 0.0],
                vec![0.0, 0.0, 18.0]
            ]
        );
        let big = MatrixGe::identity(7);
        assert_eq!(big.det(), Err(CoreError::MatrixTooLarge(7)));
        assert_eq!(
            MatrixGe::new(vec![vec![e()], vec![e()]]),
            Err(CoreError::NotSquare)
        );
    }
}
