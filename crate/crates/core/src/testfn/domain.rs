//! Open sets as finite unions of open boxes, and compact sample boxes.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Open axis-aligned box; bounds may be infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl OpenBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(CoreError::InvalidArgument(
                "box bounds must have equal, positive length".into(),
            ));
        }
        if lo
            .iter()
            .zip(&hi)
            .any(|(a, b)| a.partial_cmp(b) != Some(std::cmp::Ordering::Less))
        {
            return Err(CoreError::InvalidArgument(format!(
                "empty box {lo:?}..{hi:?}"
            )));
        }
        Ok(OpenBox { lo, hi })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| a < v && v < b)
    }

    /// Closed cube of half-width `r` around `c` lies inside this box.
    pub fn contains_ball(&self, c: &[f64], r: f64) -> bool {
        c.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| *a < v - r && v + r < *b)
    }

    pub fn contains_closed(&self, lo: &[f64], hi: &[f64]) -> bool {
        (0..self.lo.len()).all(|i| self.lo[i] < lo[i] && hi[i] < self.hi[i])
    }

    pub fn intersection(&self, other: &OpenBox) -> Option<OpenBox> {
        let lo: Vec<f64> = self
            .lo
            .iter()
            .zip(&other.lo)
            .map(|(a, b)| a.max(*b))
            .collect();
        let hi: Vec<f64> = self
            .hi
            .iter()
            .zip(&other.hi)
            .map(|(a, b)| a.min(*b))
            .collect();
        if lo.iter().zip(&hi).all(|(a, b)| a < b) {
            Some(OpenBox { lo, hi })
        } else {
            None
        }
    }

    /// Center after clipping infinite bounds to `[clip_lo, clip_hi]`.
    pub fn clipped_center(&self, clip_lo: &[f64], clip_hi: &[f64]) -> Vec<f64> {
        (0..self.lo.len())
            .map(|i| {
                let a = if self.lo[i].is_finite() {
                    self.lo[i]
                } else {
                    clip_lo[i].min(self.hi[i] - 1.0)
                };
                let b = if self.hi[i].is_finite() {
                    self.hi[i]
                } else {
                    clip_hi[i].max(self.lo[i] + 1.0)
                };
                (a + b) / 2.0
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub n: usize,
    pub boxes: Vec<OpenBox>,
    pub connected: bool,
}

impl Domain {
    pub fn new(boxes: Vec<OpenBox>) -> Result<Self> {
        let n = boxes
            .first()
            .map(|b| b.lo.len())
            .ok_or_else(|| CoreError::InvalidArgument("domain needs at least one box".into()))?;
        if let Some(b) = boxes.iter().find(|b| b.lo.len() != n) {
            return Err(CoreError::DimensionMismatch {
                expected: n,
                found: b.lo.len(),
            });
        }
        let connected = components(&boxes) == 1;
        Ok(Domain {
            n,
            boxes,
            connected,
        })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Domain::new(vec![OpenBox::new(vec![a], vec![b])?])
    }

    pub fn cube(n: usize, a: f64, b: f64) -> Result<Self> {
        Domain::new(vec![OpenBox::new(vec![a; n], vec![b; n])?])
    }

    pub fn whole(n: usize) -> Self {
        Domain::new(vec![OpenBox {
            lo: vec![f64::NEG_INFINITY; n],
            hi: vec![f64::INFINITY; n],
        }])
        .expect("whole space is a valid domain")
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.boxes.iter().any(|b| b.contains(x))
    }

    /// Box-wise test that the closed ball `B_r(c)` lies in the domain.
    pub fn contains_ball(&self, c: &[f64], r: f64) -> bool {
        self.boxes.iter().any(|b| b.contains_ball(c, r))
    }

    pub fn box_containing(&self, k: &CompactBox) -> Option<usize> {
        self.boxes
            .iter()
            .position(|b| b.contains_closed(&k.lo, &k.hi))
    }

    /// `K ⊂ Ω`: inside a single box, or else every grid node inside the union.
    pub fn check_compact(&self, k: &CompactBox) -> Result<()> {
        if k.n() != self.n {
            return Err(CoreError::DimensionMismatch {
                expected: self.n,
                found: k.n(),
            });
        }
        if self.box_containing(k).is_some() {
            return Ok(());
        }
        match k.nodes().into_iter().find(|p| !self.contains_point(p)) {
            Some(p) => Err(CoreError::CompactNotInDomain(p)),
            None => Ok(()),
        }
    }

    /// Shortest chain of pairwise overlapping boxes from `from` to `to`.
    pub fn box_path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let m = self.boxes.len();
        let mut prev = vec![usize::MAX; m];
        let mut seen = vec![false; m];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(i) = queue.pop_front() {
            if i == to {
                let mut path = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = prev[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for j in 0..m {
                if !seen[j] && self.boxes[i].intersection(&self.boxes[j]).is_some() {
                    seen[j] = true;
                    prev[j] = i;
                    queue.push_back(j);
                }
            }
        }
        None
    }
}

fn components(boxes: &[OpenBox]) -> usize {
    let m = boxes.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..m {
        for j in i + 1..m {
            if boxes[i].intersection(&boxes[j]).is_some() {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    (0..m).filter(|&i| find(&mut parent, i) == i).count()
}

/// Closed box with a uniform sample grid of `points` nodes per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub points: usize,
}

pub const DEFAULT_KGRID_POINTS: usize = 129;

impl CompactBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, points: usize) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(CoreError::InvalidArgument(
                "compact box bounds must have equal, positive length".into(),
            ));
        }
        if lo
            .iter()
            .zip(&hi)
            .any(|(a, b)| a > b || !a.is_finite() || !b.is_finite())
        {
            return Err(CoreError::InvalidArgument(format!(
                "invalid compact box {lo:?}..{hi:?}"
            )));
        }
        if points == 0 {
            return Err(CoreError::InvalidArgument(
                "grid needs at least one point per axis".into(),
            ));
        }
        Ok(CompactBox { lo, hi, points })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        CompactBox::new(vec![a], vec![b], DEFAULT_KGRID_POINTS)
    }

    pub fn point(x: Vec<f64>) -> Self {
        CompactBox {
            lo: x.clone(),
            hi: x,
            points: 1,
        }
    }

    pub fn with_points(mut self, points: usize) -> Self {
        self.points = points.max(1);
        self
    }

    pub fn n(&self) -> usize {
        self.lo.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (a + b) / 2.0)
            .collect()
    }

    pub fn diameter(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| a <= v && v <= b)
    }

    fn axis(&self, d: usize) -> Vec<f64> {
        let (a, b) = (self.lo[d], self.hi[d]);
        if a == b || self.points == 1 {
            return vec![if a == b { a } else { (a + b) / 2.0 }];
        }
        let m = self.points - 1;
        (0..=m)
            .map(|k| {
                if k == m {
                    b
                } else {
                    a + (b - a) * k as f64 / m as f64
                }
            })
            .collect()
    }

    /// Uniform grid nodes in row-major order.
    pub fn nodes(&self) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = (0..self.n()).map(|d| self.axis(d)).collect();
        let mut out = vec![Vec::new()];
        for axis in &axes {
            let mut next = Vec::with_capacity(out.len() * axis.len());
            for p in &out {
                for &v in axis {
                    let mut q = p.clone();
                    q.push(v);
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }

    /// Grid nodes plus, when `stencil` is set, the points offset from each
    /// node by `±ε/2` and `±ε` along each axis that stay inside the box.
    pub fn sample(&self, eps: f64, stencil: bool) -> Vec<Vec<f64>> {
        let nodes = self.nodes();
        if !stencil {
            return nodes;
        }
        let mut out = nodes.clone();
        for node in &nodes {
            for d in 0..self.n() {
                for off in [-eps, -eps / 2.0, eps / 2.0, eps] {
                    let mut p = node.clone();
                    p[d] += off;
                    if self.contains(&p) {
                        out.push(p);
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn connectivity_from_overlaps() {
        let a = OpenBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let b = OpenBox::new(vec![0.5, 0.0], vec![1.5, 1.0]).unwrap();
        let c = OpenBox::new(vec![1.5, 0.0], vec![2.5, 1.0]).unwrap();
        assert!(Domain::new(vec![a.clone(), b.clone()]).unwrap().connected);
        // boxes sharing only a face do not connect the union
        assert!(!Domain::new(vec![b.clone(), c.clone()]).unwrap().connected);
        let d = Domain::new(vec![a, b, c]).unwrap();
        assert!(!d.connected);
        assert_eq!(d.box_path(0, 1), Some(vec![0, 1]));
        assert_eq!(d.box_path(0, 2), None);
    }

    #[test]
    fn ball_containment_is_boxwise() {
        let d = Domain::interval(-1.0, 1.0).unwrap();
        assert!(d.contains_ball(&[0.0], 0.99));
        assert!(!d.contains_ball(&[0.0], 1.0));
        assert!(!d.contains_ball(&[0.5], 0.5));
        assert!(Domain::whole(2).contains_ball(&[1e9, -1e9], 1e9));
    }

    #[test]
    fn grids_and_stencils() {
        let k = CompactBox::new(vec![0.0], vec![1.0], 5).unwrap();
        assert_eq!(
            k.nodes(),
            vec![vec![0.0], vec![0.25], vec![0.5], vec![0.75], vec![1.0]]
        );
        let s = k.sample(0.01, true);
        assert!(s.contains(&vec![0.01]));
        assert!(s.iter().all(|p| k.contains(p)));
        assert_eq!(s.len(), 5 + 5 * 4 - 4);
        let p = CompactBox::point(vec![0.0]);
        assert_eq!(p.sample(0.1, true), vec![vec![0.0]]);
        let sq = CompactBox::new(vec![0.0, 0.0], vec![1.0, 2.0], 3).unwrap();
        assert_eq!(sq.nodes().len(), 9);
        assert_eq!(sq.nodes()[1], vec![0.0, 1.0]);
    }
}
