//! Multi-index enumeration.
//!
//! Indices are ordered by total degree, and within one degree
//! lexicographically with the first coordinate largest first, so for
//! `n = 2` the order is `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...`.

pub type MultiIndex = Vec<u32>;

/// All multi-indices in `n` variables with total degree exactly `degree`.
pub fn of_degree(n: usize, degree: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut current = vec![0u32; n];
    fill(&mut out, &mut current, 0, degree);
    out
}

fn fill(out: &mut Vec<MultiIndex>, current: &mut MultiIndex, pos: usize, remaining: u32) {
    let n = current.len();
    if n == 0 {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if pos == n - 1 {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for k in (0..=remaining).rev() {
        current[pos] = k;
        fill(out, current, pos + 1, remaining - k);
    }
    current[pos] = 0;
}

/// All multi-indices in `n` variables with total degree at most `max_degree`.
pub fn up_to(n: usize, max_degree: u32) -> Vec<MultiIndex> {
    (0..=max_degree).flat_map(|d| of_degree(n, d)).collect()
}

pub fn degree(alpha: &[u32]) -> u32 {
    alpha.iter().sum()
}

pub fn factorial(alpha: &[u32]) -> f64 {
    alpha
        .iter()
        .map(|&a| (1..=a).map(f64::from).product::<f64>())
        .product()
}

pub fn add(a: &[u32], b: &[u32]) -> MultiIndex {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn unit(n: usize, i: usize) -> MultiIndex {
    let mut e = vec![0; n];
    e[i] = 1;
    e
}

/// `y^alpha` for a point `y`.
pub fn monomial(y: &[f64], alpha: &[u32]) -> f64 {
    y.iter()
        .zip(alpha)
        .map(|(&v, &a)| v.powi(a as i32))
        .product()
}

/// Number of multi-indices in `n` variables with degree at most `d`.
pub fn count_up_to(n: usize, d: u32) -> usize {
    // binomial(n + d, n)
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for k in 1..=n as u128 {
        num *= d as u128 + k;
        den *= k;
    }
    (num / den) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_two_dimensions() {
        assert_eq!(
            up_to(2, 2),
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
    }

    #[test]
    fn counts_match_binomial() {
        for n in 1..4 {
            for d in 0..7 {
                assert_eq!(up_to(n, d).len(), count_up_to(n, d));
            }
        }
        // 1 + 2 + 3 monomials of degree <= 2 in two variables
        assert_eq!(count_up_to(2, 2), 6);
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(&[3, 2]), 12.0);
        assert_eq!(factorial(&[]), 1.0);
    }
}
