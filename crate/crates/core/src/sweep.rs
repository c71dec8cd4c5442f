//! Grid sweeps over ε × sample points, and the quantifier searches that
//! turn per-family samples into verdicts.

use rayon::prelude::*;

use crate::asymptotics::{landau_violations, EpsGrid, Sample};
use crate::error::Result;
use crate::testfn::CompactBox;
use crate::verdict::{LabeledEstimate, Verdict};

/// Where points are sampled for a sweep.
#[derive(Debug, Clone, Copy)]
pub enum Sampling<'a> {
    Box { k: &'a CompactBox, stencil: bool },
    Points(&'a [Vec<f64>]),
}

impl Sampling<'_> {
    pub fn points(&self, eps: f64) -> Vec<Vec<f64>> {
        match self {
            Sampling::Box { k, stencil } => k.sample(eps, *stencil),
            Sampling::Points(p) => p.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduce {
    Sup,
    Inf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub eps: f64,
    pub magnitude: f64,
    /// Extremal point; empty when every point was skipped.
    pub point: Vec<f64>,
    pub skips: u64,
}

/// For each ε, the sup (or inf) over the sampled points of `f(ε, x)`.
///
/// `f` returns `None` for pairs outside the guarded domain; they are
/// skipped and counted. Ties go to the first point in sampling order, NaN
/// counts as the most extreme value, and rows are computed in parallel but
/// returned in grid order.
pub fn sweep<F>(
    eps_values: &[f64],
    sampling: Sampling<'_>,
    reduce: Reduce,
    f: F,
) -> Result<Vec<Row>>
where
    F: Fn(f64, &[f64]) -> Result<Option<f64>> + Sync,
{
    eps_values
        .par_iter()
        .map(|&eps| {
            let points = sampling.points(eps);
            let mut best: Option<(f64, usize)> = None;
            let mut skips = 0u64;
            for (i, x) in points.iter().enumerate() {
                let Some(v) = f(eps, x)? else {
                    skips += 1;
                    continue;
                };
                let v = v.abs();
                let better = match best {
                    None => true,
                    Some((b, _)) => match reduce {
                        Reduce::Sup => v.total_cmp(&b).is_gt(),
                        Reduce::Inf => !b.is_nan() && (v.is_nan() || v < b),
                    },
                };
                if better {
                    best = Some((v, i));
                }
            }
            Ok(match best {
                Some((magnitude, i)) => Row {
                    eps,
                    magnitude,
                    point: points[i].clone(),
                    skips,
                },
                None => Row {
                    eps,
                    magnitude: match reduce {
                        Reduce::Sup => 0.0,
                        Reduce::Inf => f64::INFINITY,
                    },
                    point: Vec::new(),
                    skips,
                },
            })
        })
        .collect()
}

/// Samples of one member of a family (a battery test function or a net).
#[derive(Debug, Clone)]
pub struct Family {
    pub q: u32,
    pub label: String,
    pub rows: Vec<Row>,
}

impl Family {
    pub fn samples(&self) -> Vec<Sample> {
        self.rows
            .iter()
            .map(|r| Sample::new(r.eps, r.magnitude))
            .collect()
    }

    pub fn skips(&self) -> u64 {
        self.rows.iter().map(|r| r.skips).sum()
    }
}

pub fn estimate(label: String, samples: &[Sample], grid: &EpsGrid) -> LabeledEstimate {
    LabeledEstimate::fit(label, samples, grid)
}

fn upper_ok(f: &Family, p: f64, cutoff: f64) -> Result<bool> {
    Ok(landau_violations(&f.samples(), p, cutoff)?.is_empty())
}

/// Indices of window samples with `magnitude < ε^p`.
pub fn lower_violations(f: &Family, p: f64, cutoff: f64) -> Vec<usize> {
    f.rows
        .iter()
        .enumerate()
        .filter(|(_, r)| {
            r.eps < cutoff && {
                let bound = crate::asymptotics::eps_pow(r.eps, p);
                r.magnitude.is_nan() || r.magnitude < bound
            }
        })
        .map(|(i, _)| i)
        .collect()
}

/// Smallest `N ∈ 1..=n_max` with `|f| ≤ ε^{-N}` for every member of order
/// at least `min(N, top)`.
pub fn moderate_search(families: &[Family], n_max: u32, cutoff: f64) -> Result<Option<u32>> {
    let top = families.iter().map(|f| f.q).max().unwrap_or(0);
    for n in 1..=n_max {
        let q_min = n.min(top);
        let mut ok = true;
        for f in families.iter().filter(|f| f.q >= q_min) {
            if !upper_ok(f, -(n as f64), cutoff)? {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// Smallest `q` such that every member of order at least `q` satisfies
/// `|f| ≤ ε^m`.
pub fn negligible_search(families: &[Family], m: u32, cutoff: f64) -> Result<Option<u32>> {
    let mut qs: Vec<u32> = families.iter().map(|f| f.q).collect();
    qs.sort_unstable();
    qs.dedup();
    for &q in &qs {
        let mut ok = true;
        for f in families.iter().filter(|f| f.q >= q) {
            if !upper_ok(f, m as f64, cutoff)? {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(Some(q));
        }
    }
    Ok(None)
}

/// Smallest `q ≥ 1` such that every member of order at least `q` satisfies
/// `|f| ≥ ε^q` on the window.
pub fn lower_search(families: &[Family], cutoff: f64) -> Option<u32> {
    let top = families.iter().map(|f| f.q).max().unwrap_or(0);
    (1..=top.max(1)).find(|&q| {
        families
            .iter()
            .filter(|f| f.q >= q)
            .all(|f| lower_violations(f, q as f64, cutoff).is_empty())
            && families.iter().any(|f| f.q >= q)
    })
}

/// Family with the largest order (the last among equals).
pub fn top_family(families: &[Family]) -> Option<&Family> {
    families.iter().rev().max_by_key(|f| f.q)
}

/// Witness location for an upper-bound failure: violating rows of the
/// top family at exponent `p`, the finest one first.
pub fn upper_failure(f: &Family, p: f64, cutoff: f64) -> Result<Option<(&Row, Vec<Sample>)>> {
    let samples = f.samples();
    let bad = landau_violations(&samples, p, cutoff)?;
    Ok(bad.last().map(|&i| {
        let seq = bad.iter().map(|&j| samples[j]).collect();
        (&f.rows[i], seq)
    }))
}

pub fn lower_failure(f: &Family, p: f64, cutoff: f64) -> Option<(&Row, Vec<Sample>)> {
    let bad = lower_violations(f, p, cutoff);
    let samples = f.samples();
    bad.last().map(|&i| {
        let seq = bad.iter().map(|&j| samples[j]).collect();
        (&f.rows[i], seq)
    })
}

/// Outcome of the `∀m ∃q` negligibility search.
pub enum NegligibleOutcome<'a> {
    Supported(Vec<(u32, u32)>),
    Refuted {
        passed: Vec<(u32, u32)>,
        m: u32,
        row: &'a Row,
        family: &'a Family,
        sequence: Vec<Sample>,
    },
}

pub fn negligible_all_orders(
    families: &[Family],
    m_max: u32,
    cutoff: f64,
) -> Result<NegligibleOutcome<'_>> {
    let mut passed = Vec::new();
    for m in 1..=m_max {
        match negligible_search(families, m, cutoff)? {
            Some(q) => passed.push((m, q)),
            None => {
                let family = top_family(families).expect("non-empty family list");
                let (row, sequence) = upper_failure(family, m as f64, cutoff)?
                    .expect("search failure implies a violation in the top family");
                return Ok(NegligibleOutcome::Refuted {
                    passed,
                    m,
                    row,
                    family,
                    sequence,
                });
            }
        }
    }
    Ok(NegligibleOutcome::Supported(passed))
}

pub fn certify_pairs(mut v: Verdict, pairs: &[(u32, u32)]) -> Verdict {
    for (m, q) in pairs {
        v = v.certify(format!("q(m={m})"), *q as i64);
    }
    v
}
