//! Truncated multivariate Taylor polynomials.
//!
//! A [`Jet`] of order `k` in `n` variables stores the Taylor coefficients
//! `∂^α f(a) / α!` for every `|α| ≤ k`. Arithmetic on jets propagates exact
//! derivatives through products and compositions, which is how derivative
//! rules of test functions, formulas and embedded distributions are built.

use std::collections::HashMap;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::multiindex::{self, MultiIndex};

pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn from_real(x: f64) -> Self;
    fn zero() -> Self {
        Self::from_real(0.0)
    }
    fn one() -> Self {
        Self::from_real(1.0)
    }
}

impl Scalar for f64 {
    fn from_real(x: f64) -> Self {
        x
    }
}

impl Scalar for Complex64 {
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

type SpaceCache = HashMap<(usize, u32), Arc<JetSpace>>;

/// Index layout and product table shared by all jets of a given shape.
#[derive(Debug)]
pub struct JetSpace {
    pub n: usize,
    pub order: u32,
    pub indices: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
    products: Vec<(usize, usize, usize)>,
}

impl JetSpace {
    fn build(n: usize, order: u32) -> Self {
        let indices = multiindex::up_to(n, order);
        let lookup: HashMap<MultiIndex, usize> = indices
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        let mut products = Vec::new();
        for (i, a) in indices.iter().enumerate() {
            for (j, b) in indices.iter().enumerate() {
                if multiindex::degree(a) + multiindex::degree(b) <= order {
                    let k = lookup[&multiindex::add(a, b)];
                    products.push((i, j, k));
                }
            }
        }
        JetSpace {
            n,
            order,
            indices,
            lookup,
            products,
        }
    }

    /// Cached space for `n` variables truncated at `order`.
    pub fn get(n: usize, order: u32) -> Arc<JetSpace> {
        static CACHE: OnceLock<Mutex<SpaceCache>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("jet space cache poisoned");
        guard
            .entry((n, order))
            .or_insert_with(|| Arc::new(JetSpace::build(n, order)))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn index_of(&self, alpha: &[u32]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }
}

#[derive(Debug, Clone)]
pub struct Jet<T: Scalar> {
    pub space: Arc<JetSpace>,
    pub coeffs: Vec<T>,
}

impl<T: Scalar> Jet<T> {
    pub fn constant(space: &Arc<JetSpace>, value: T) -> Self {
        let mut coeffs = vec![T::zero(); space.len()];
        coeffs[0] = value;
        Jet {
            space: space.clone(),
            coeffs,
        }
    }

    /// The coordinate function `y_i` expanded around `y_i = value`.
    pub fn variable(space: &Arc<JetSpace>, i: usize, value: T) -> Self {
        let mut jet = Self::constant(space, value);
        if space.order >= 1 {
            let idx = space
                .index_of(&multiindex::unit(space.n, i))
                .expect("unit index present");
            jet.coeffs[idx] = T::one();
        }
        jet
    }

    pub fn value(&self) -> T {
        self.coeffs[0]
    }

    /// `∂^α` of the expanded function at the expansion point.
    pub fn derivative(&self, alpha: &[u32]) -> T {
        match self.space.index_of(alpha) {
            Some(idx) => self.coeffs[idx] * T::from_real(multiindex::factorial(alpha)),
            None => T::zero(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| a + b)
            .collect();
        Jet {
            space: self.space.clone(),
            coeffs,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| a - b)
            .collect();
        Jet {
            space: self.space.clone(),
            coeffs,
        }
    }

    pub fn scale(&self, c: T) -> Self {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|&a| a * c).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|&a| -a).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut coeffs = vec![T::zero(); self.coeffs.len()];
        for &(i, j, k) in &self.space.products {
            coeffs[k] = coeffs[k] + self.coeffs[i] * other.coeffs[j];
        }
        Jet {
            space: self.space.clone(),
            coeffs,
        }
    }

    pub fn powi(&self, exponent: u32) -> Self {
        let mut result = Jet::constant(&self.space, T::one());
        for _ in 0..exponent {
            result = result.mul(self);
        }
        result
    }

    /// Composition `g ∘ self` given `derivs[j] = g^{(j)}(self.value())`.
    ///
    /// Missing trailing derivatives are treated as zero.
    pub fn compose(&self, derivs: &[T]) -> Self {
        let order = self.space.order as usize;
        let mut h = self.clone();
        h.coeffs[0] = T::zero();
        let coefficient = |j: usize| -> T {
            let d = derivs.get(j).copied().unwrap_or_else(T::zero);
            let fact: f64 = (1..=j).map(|v| v as f64).product();
            d * T::from_real(1.0 / fact)
        };
        let mut result = Jet::constant(&self.space, coefficient(order));
        for j in (0..order).rev() {
            result = result.mul(&h);
            result.coeffs[0] = result.coeffs[0] + coefficient(j);
        }
        result
    }

    /// Jet of `∂_i f` one order lower, from a jet of `f`.
    pub fn partial(&self, i: usize) -> Self {
        let target = JetSpace::get(self.space.n, self.space.order.saturating_sub(1));
        let mut coeffs = vec![T::zero(); target.len()];
        if self.space.order > 0 {
            for (k, beta) in target.indices.iter().enumerate() {
                let mut up = beta.clone();
                up[i] += 1;
                let src = self.space.index_of(&up).expect("raised index in space");
                coeffs[k] = self.coeffs[src] * T::from_real(up[i] as f64);
            }
        }
        Jet {
            space: target,
            coeffs,
        }
    }

    /// Re-expand into a space of lower order.
    pub fn truncate(&self, order: u32) -> Self {
        let target = JetSpace::get(self.space.n, order.min(self.space.order));
        let coeffs = target
            .indices
            .iter()
            .map(|a| self.coeffs[self.space.index_of(a).expect("index in space")])
            .collect();
        Jet {
            space: target,
            coeffs,
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Jet<U> {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|&c| f(c)).collect(),
        }
    }
}

impl Jet<f64> {
    pub fn to_complex(&self) -> Jet<Complex64> {
        self.map(|c| Complex64::new(c, 0.0))
    }
}

/// Derivatives `f^{(j)}(a)` for `j = 0..=order` of common scalar functions.
pub mod univariate {
    use super::Scalar;

    pub fn reciprocal<T: Scalar>(a: T, order: u32) -> Vec<T> {
        let inv = T::one() / a;
        let mut out = Vec::with_capacity(order as usize + 1);
        let mut term = inv;
        for j in 0..=order {
            out.push(term);
            term = term * inv * T::from_real(-((j + 1) as f64));
        }
        out
    }

    pub fn power(a: f64, exponent: f64, order: u32) -> Vec<f64> {
        let mut out = Vec::with_capacity(order as usize + 1);
        let mut coefficient = 1.0;
        for j in 0..=order {
            out.push(coefficient * a.powf(exponent - j as f64));
            coefficient *= exponent - j as f64;
        }
        out
    }

    pub fn sin(a: f64, order: u32) -> Vec<f64> {
        let (s, c) = a.sin_cos();
        (0..=order)
            .map(|j| match j % 4 {
                0 => s,
                1 => c,
                2 => -s,
                _ => -c,
            })
            .collect()
    }

    pub fn cos(a: f64, order: u32) -> Vec<f64> {
        let (s, c) = a.sin_cos();
        (0..=order)
            .map(|j| match j % 4 {
                0 => c,
                1 => -s,
                2 => -c,
                _ => s,
            })
            .collect()
    }

    pub fn exp(a: f64, order: u32) -> Vec<f64> {
        vec![a.exp(); order as usize + 1]
    }

    pub fn ln(a: f64, order: u32) -> Vec<f64> {
        let mut out = vec![a.ln()];
        let mut fact = 1.0;
        for j in 1..=order {
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            out.push(sign * fact / a.powi(j as i32));
            fact *= j as f64;
        }
        out
    }

    /// Derivatives of `s ↦ exp(-1/(1-s))` for `s < 1`, zero for `s ≥ 1`.
    ///
    /// With `t = 1/(1-s)` the `j`-th derivative is `e^{-t} P_j(t)` where
    /// `P_0 = 1` and `P_{j+1}(t) = t² (P_j'(t) - P_j(t))`.
    pub fn bump_sq(s: f64, order: u32) -> Vec<f64> {
        if s >= 1.0 {
            return vec![0.0; order as usize + 1];
        }
        let t = 1.0 / (1.0 - s);
        let e = (-t).exp();
        if e == 0.0 {
            return vec![0.0; order as usize + 1];
        }
        // polynomial coefficients of P_j in t, lowest degree first
        let mut poly = vec![1.0];
        let mut out = Vec::with_capacity(order as usize + 1);
        for _ in 0..=order {
            let value = poly.iter().rev().fold(0.0, |acc, &c| acc * t + c);
            out.push(e * value);
            let mut next = vec![0.0; poly.len() + 2];
            for (k, &c) in poly.iter().enumerate() {
                if k > 0 {
                    next[k + 1] += k as f64 * c;
                }
                next[k + 2] -= c;
            }
            poly = next;
        }
        out
    }
}
