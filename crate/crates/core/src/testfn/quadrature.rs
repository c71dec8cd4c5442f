//! Gauss–Legendre rules and compensated summation.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// `n`-point Gauss–Legendre rule on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard.entry(n).or_insert_with(|| Arc::new(build(n))).clone()
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn build(n: usize) -> Rule {
    assert!(n >= 1, "quadrature needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

/// Neumaier's compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    sum: f64,
    carry: f64,
}

impl Accumulator {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Accumulator::default();
    for v in values {
        acc.add(v);
    }
    acc.total()
}

pub fn integrate_interval(f: impl Fn(f64) -> f64, a: f64, b: f64, nodes: usize) -> f64 {
    let rule = gauss_legendre(nodes);
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    half * compensated_sum(
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&t, &w)| w * f(mid + half * t)),
    )
}

/// Tensor-product rule on the box `[lo, hi]`: points and weights.
pub fn tensor_rule(lo: &[f64], hi: &[f64], nodes: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let rule = gauss_legendre(nodes);
    let n = lo.len();
    let total = nodes.pow(n as u32);
    let mut points = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        let mut p = Vec::with_capacity(n);
        let mut w = 1.0;
        for d in 0..n {
            let (mid, half) = ((lo[d] + hi[d]) / 2.0, (hi[d] - lo[d]) / 2.0);
            p.push(mid + half * rule.nodes[idx[d]]);
            w *= half * rule.weights[idx[d]];
        }
        points.push(p);
        weights.push(w);
        for d in (0..n).rev() {
            idx[d] += 1;
            if idx[d] < nodes {
                break;
            }
            idx[d] = 0;
        }
    }
    (points, weights)
}

/// Tensorized Gauss–Legendre integral of `f` over the box `[lo, hi]`.
pub fn integrate_box(f: impl Fn(&[f64]) -> f64, lo: &[f64], hi: &[f64], nodes: usize) -> f64 {
    let (points, weights) = tensor_rule(lo, hi, nodes);
    compensated_sum(points.iter().zip(&weights).map(|(p, w)| w * f(p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integrates_polynomials_exactly() {
        // an n-point rule is exact through degree 2n - 1
        for n in [1usize, 2, 5, 16, 64] {
            let d = 2 * n as i32 - 1;
            let v = integrate_interval(|x| x.powi(d) + x.powi(d - 1), -1.0, 1.0, n);
            let expected = if d >= 1 && (d - 1) % 2 == 0 {
                2.0 / d as f64
            } else {
                0.0
            };
            assert_relative_eq!(v, expected, epsilon = 1e-13);
        }
    }

    #[test]
    fn weights_sum_to_two() {
        for n in [3usize, 64, 128] {
            let r = gauss_legendre(n);
            assert_relative_eq!(
                compensated_sum(r.weights.iter().copied()),
                2.0,
                epsilon = 1e-14
            );
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn box_integral() {
        let v = integrate_box(|p| p[0] * p[0] * p[1].exp(), &[0.0, 0.0], &[1.0, 1.0], 16);
        assert_relative_eq!(v, (1f64.exp() - 1.0) / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn compensation_recovers_small_terms() {
        let v = compensated_sum([1e16, 1.0, -1e16]);
        assert_eq!(v, 1.0);
    }
}
