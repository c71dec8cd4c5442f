//! ε-grids, Landau checks with constant 1, and log-log order estimation.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::real;

/// Geometric grid `ε_i = base^i` for `i = start_exp..=end_exp`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsGrid {
    pub base: f64,
    pub start_exp: u32,
    pub end_exp: u32,
}

pub const MIN_GRID_POINTS: u32 = 8;

impl Default for EpsGrid {
    fn default() -> Self {
        EpsGrid {
            base: 0.5,
            start_exp: 4,
            end_exp: 36,
        }
    }
}

impl EpsGrid {
    pub fn new(base: f64, start_exp: u32, end_exp: u32) -> Result<Self> {
        if !(base > 0.0 && base < 1.0) {
            return Err(CoreError::InvalidGrid(format!("base {base} not in (0,1)")));
        }
        if start_exp == 0 {
            return Err(CoreError::InvalidGrid("exponents must be positive".into()));
        }
        if end_exp < start_exp || end_exp - start_exp + 1 < MIN_GRID_POINTS {
            return Err(CoreError::InvalidGrid(format!(
                "need at least {MIN_GRID_POINTS} points, got exponents {start_exp}..={end_exp}"
            )));
        }
        let grid = EpsGrid {
            base,
            start_exp,
            end_exp,
        };
        if grid.values().iter().any(|&e| e <= 0.0) {
            return Err(CoreError::InvalidGrid("grid underflows to zero".into()));
        }
        Ok(grid)
    }

    pub fn values(&self) -> Vec<f64> {
        (self.start_exp..=self.end_exp)
            .map(|i| self.base.powi(i as i32))
            .collect()
    }

    pub fn len(&self) -> usize {
        (self.end_exp - self.start_exp + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn asymptotic_window(&self) -> Range<usize> {
        asymptotic_window(self.len())
    }

    /// Cutoff selecting exactly the asymptotic window under `ε < cutoff`.
    pub fn window_cutoff(&self) -> f64 {
        let values = self.values();
        let w = self.asymptotic_window();
        if w.start == 0 {
            1.0 + values[0]
        } else {
            values[w.start - 1]
        }
    }

    pub fn label(&self) -> String {
        format!("{:?}^{}..{}", self.base, self.start_exp, self.end_exp)
    }
}

/// The smallest-ε half of a grid of `len` points (rounded up).
pub fn asymptotic_window(len: usize) -> Range<usize> {
    len / 2..len
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub eps: f64,
    #[serde(with = "real")]
    pub magnitude: f64,
}

impl Sample {
    pub fn new(eps: f64, magnitude: f64) -> Self {
        Sample { eps, magnitude }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderEstimate {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    /// Largest ε of the fit window.
    pub window_start: f64,
    /// Smallest ε of the fit window.
    pub window_end: f64,
    pub used: usize,
    pub excluded_zeros: usize,
    pub excluded_nonfinite: usize,
}

pub const MIN_FIT_POINTS: usize = 4;

/// Least-squares fit of `log|f|` against `log ε` over `window`.
///
/// Zero magnitudes lie below every order and are excluded; so are
/// non-finite ones. Logarithms are taken base 2 internally so that exact
/// powers on dyadic grids give exact slopes; intercept and residual are
/// reported in natural-log units.
pub fn fit_order(samples: &[Sample], window: Range<usize>) -> Result<OrderEstimate> {
    let end = window.end.min(samples.len());
    let slice = &samples[window.start.min(end)..end];
    if slice.is_empty() {
        return Err(CoreError::InsufficientData {
            usable: 0,
            needed: MIN_FIT_POINTS,
        });
    }
    let zeros = slice.iter().filter(|s| s.magnitude == 0.0).count();
    let nonfinite = slice.iter().filter(|s| !s.magnitude.is_finite()).count();
    let points: Vec<(f64, f64)> = slice
        .iter()
        .filter(|s| s.magnitude > 0.0 && s.magnitude.is_finite())
        .map(|s| (s.eps.log2(), s.magnitude.log2()))
        .collect();
    if zeros == slice.len() {
        return Err(CoreError::IdenticallyZero);
    }
    if points.len() < MIN_FIT_POINTS {
        return Err(CoreError::InsufficientData {
            usable: points.len(),
            needed: MIN_FIT_POINTS,
        });
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(CoreError::InvalidGrid("fit window has a single ε".into()));
    }
    let slope = sxy / sxx;
    let intercept2 = my - slope * mx;
    let residual2 = points
        .iter()
        .map(|p| (p.1 - (intercept2 + slope * p.0)).abs())
        .fold(0.0, f64::max);
    let ln2 = std::f64::consts::LN_2;
    Ok(OrderEstimate {
        slope,
        intercept: intercept2 * ln2,
        residual: residual2 * ln2,
        window_start: slice[0].eps,
        window_end: slice[slice.len() - 1].eps,
        used: points.len(),
        excluded_zeros: zeros,
        excluded_nonfinite: nonfinite,
    })
}

/// `ε^p`, exact for integral `p` on dyadic ε.
pub fn eps_pow(eps: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && p.abs() < i32::MAX as f64 {
        eps.powi(p as i32)
    } else {
        eps.powf(p)
    }
}

/// Whether one sample satisfies `|f(ε)| ≤ ε^p`.
pub fn within(sample: &Sample, p: f64) -> bool {
    sample.magnitude == 0.0 || sample.magnitude <= eps_pow(sample.eps, p)
}

/// Indices of samples with `ε < cutoff` violating `|f(ε)| ≤ ε^p`.
pub fn landau_violations(samples: &[Sample], p: f64, cutoff: f64) -> Result<Vec<usize>> {
    let mut checked = 0;
    let mut bad = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        if s.eps < cutoff {
            checked += 1;
            if !within(s, p) {
                bad.push(i);
            }
        }
    }
    if checked == 0 {
        return Err(CoreError::EmptyCheck { cutoff });
    }
    Ok(bad)
}

/// `|f(ε_i)| ≤ ε_i^p` for every sample with `ε_i < cutoff`.
pub fn landau_check(samples: &[Sample], p: f64, cutoff: f64) -> Result<bool> {
    Ok(landau_violations(samples, p, cutoff)?.is_empty())
}

/// Fit window for rate measurements whose signal sinks into rounding noise.
///
/// Takes the leading run of samples above `floor` (coarsest ε first) and
/// returns its finer half, widened to at least [`MIN_FIT_POINTS`] when the
/// run allows.
pub fn window_above_floor(samples: &[Sample], floor: f64) -> Range<usize> {
    let run = samples
        .iter()
        .position(|s| !(s.magnitude > floor && s.magnitude.is_finite()))
        .unwrap_or(samples.len());
    let half = asymptotic_window(run);
    let start = if run - half.start < MIN_FIT_POINTS {
        run.saturating_sub(MIN_FIT_POINTS)
    } else {
        half.start
    };
    start..run
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sample(grid: &EpsGrid, f: impl Fn(f64) -> f64) -> Vec<Sample> {
        grid.values()
            .into_iter()
            .map(|e| Sample::new(e, f(e)))
            .collect()
    }

    #[test]
    fn default_grid_shape() {
        let g = EpsGrid::default();
        let v = g.values();
        assert_eq!(v.len(), 33);
        assert_eq!(v[0], 0.0625);
        assert_eq!(*v.last().unwrap(), 2f64.powi(-36));
        assert!(v.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(g.asymptotic_window(), 16..33);
        assert_eq!(g.window_cutoff(), 2f64.powi(-19));
        assert!(EpsGrid::new(0.5, 4, 10).is_err());
        assert!(EpsGrid::new(1.5, 4, 20).is_err());
    }

    #[test]
    fn exact_power_has_exact_slope() {
        let g = EpsGrid::new(0.5, 5, 20).unwrap();
        let s = sample(&g, |e| e.powi(-3));
        let est = fit_order(&s, 0..s.len()).unwrap();
        assert_eq!(est.slope, -3.0);
        assert_eq!(est.residual, 0.0);
        let c = fit_order(&sample(&g, |_| 5.0), 0..16).unwrap();
        assert_eq!(c.slope, 0.0);
        assert_eq!(c.residual, 0.0);
    }

    #[test]
    fn two_term_power_slope() {
        // oracle: log-log slopes of ε²+ε⁵ on ε ≤ 2^-10 lie in [2, 2 + 1e-8]
        let g = EpsGrid::new(0.5, 10, 36).unwrap();
        let s = sample(&g, |e| e * e + e.powi(5));
        let est = fit_order(&s, 0..s.len()).unwrap();
        assert!(
            est.slope >= 2.0 - 1e-12 && est.slope <= 2.0 + 1e-8,
            "{}",
            est.slope
        );
    }

    #[test]
    fn zero_and_sparse_windows() {
        let g = EpsGrid::default();
        let zeros = sample(&g, |_| 0.0);
        assert_eq!(
            fit_order(&zeros, g.asymptotic_window()),
            Err(CoreError::IdenticallyZero)
        );
        let s = sample(&g, |e| e);
        assert!(matches!(
            fit_order(&s, 0..3),
            Err(CoreError::InsufficientData { usable: 3, .. })
        ));
        let mut mixed = sample(&g, |e| e);
        for m in mixed.iter_mut().skip(20) {
            m.magnitude = 0.0;
        }
        let est = fit_order(&mixed, g.asymptotic_window()).unwrap();
        assert_eq!(est.excluded_zeros, 13);
        assert_eq!(est.slope, 1.0);
    }

    #[test]
    fn landau_examples() {
        let g = EpsGrid::default();
        assert!(landau_check(&sample(&g, |e| e.powi(3)), 2.0, 1.0).unwrap());
        assert!(landau_check(&sample(&g, |e| 2.0 * e.powi(3)), 2.0, 0.5).unwrap());
        // equality passes under the non-strict convention
        assert!(landau_check(&sample(&g, |e| e * e), 2.0, 1.0).unwrap());
        assert!(!landau_check(&sample(&g, |e| 2.0 * e * e), 2.0, 1.0).unwrap());
        assert!(!landau_check(&sample(&g, |_| f64::NAN), 2.0, 1.0).unwrap());
        assert!(landau_check(&sample(&g, |_| 0.0), 40.0, 1.0).unwrap());
        assert!(matches!(
            landau_check(&sample(&g, |e| e), 1.0, 2f64.powi(-36)),
            Err(CoreError::EmptyCheck { .. })
        ));
    }

    #[test]
    fn floor_window() {
        let g = EpsGrid::new(0.5, 1, 30).unwrap();
        let s = sample(&g, |e| (e.powi(5)).max(1e-15));
        let w = window_above_floor(&s, 1e-11);
        assert!(w.len() >= MIN_FIT_POINTS);
        let est = fit_order(&s, w).unwrap();
        assert_relative_eq!(est.slope, 5.0, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn exact_powers_recovered(p in -12i32..=12, start in 1u32..10, c in 0.01f64..100.0) {
            let g = EpsGrid::new(0.5, start, start + 12).unwrap();
            let s = sample(&g, |e| e.powi(p));
            let est = fit_order(&s, 0..s.len()).unwrap();
            prop_assert!((est.slope - p as f64).abs() < 1e-12);
            prop_assert!(est.residual < 1e-12);
            let scaled: Vec<Sample> = s.iter().map(|x| Sample::new(x.eps, c * x.magnitude)).collect();
            let est2 = fit_order(&scaled, 0..s.len()).unwrap();
            prop_assert!((est2.slope - est.slope).abs() < 1e-12);
        }

        #[test]
        fn landau_monotone_in_exponent(a in 0.1f64..10.0, k in -3.0f64..6.0, p in -4.0f64..6.0, dq in 0.0f64..5.0) {
            let g = EpsGrid::new(0.5, 2, 20).unwrap();
            let s = sample(&g, |e| a * e.powf(k));
            let cutoff = g.values()[0] * 1.5;
            if landau_check(&s, p, cutoff).unwrap() {
                prop_assert!(landau_check(&s, p - dq, cutoff).unwrap());
            }
        }
    }
}
