//! Three-valued empirical verdicts and their replayable witnesses.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::asymptotics::{fit_order, EpsGrid, OrderEstimate, Sample};
use crate::expr::Expr;
use crate::multiindex::MultiIndex;
use crate::real;
use crate::testfn::TfTag;

/// Search bounds shared by the verdict procedures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub n_max: u32,
    pub m_max: u32,
    pub evidence_min_hits: usize,
    /// Add the `x ± ε/2`, `x ± ε` stencil to every compact-set grid.
    pub eps_stencil: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            n_max: 12,
            m_max: 8,
            evidence_min_hits: 5,
            eps_stencil: true,
        }
    }
}

/// What a witness measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "probe", rename_all = "snake_case")]
pub enum Probe {
    /// `|∂^α u_ε(x)|` of a net.
    Net { alpha: MultiIndex, x: Vec<f64> },
    /// `|u_ε(x) - u_ε(y)|` of a net.
    NetSpread { x: Vec<f64>, y: Vec<f64> },
    /// `|r|` of a generalized number.
    Number,
    /// `max(r - s, 0)` of two real generalized numbers.
    NumberSlack,
    /// `|∂^α R(φ, x)|`.
    EFunc { alpha: MultiIndex, x: Vec<f64> },
    /// `|R(φ, y) - R(φ, X(φ))|`, with `point = X(φ)`.
    EFuncSpread { y: Vec<f64>, point: Vec<f64> },
    /// `|R(X)(φ)|` at the generalized point with the given coordinates.
    PointValue { point: Vec<Expr>, coords: Vec<f64> },
    /// `|∂^α R(S_ε φ(ε, x), x)|` for a registered test-object net.
    GdNet {
        net: String,
        alpha: MultiIndex,
        x: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `magnitude > ε^exponent` where an upper bound was required.
    Above,
    /// `magnitude < ε^exponent` where a lower bound was required.
    Below,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub probe: Probe,
    /// Test function at which the magnitude was measured; absent for
    /// ε-indexed objects of the special algebra.
    pub test_function: Option<TfTag>,
    pub eps: f64,
    #[serde(with = "real")]
    pub magnitude: f64,
    pub exponent: f64,
    pub relation: Relation,
    /// Every violating sample of the refuting sweep, largest ε first.
    pub sequence: Vec<Sample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum Outcome {
    RefutedWithWitness {
        witness: Box<Witness>,
    },
    SupportedUpTo {
        max_order: u32,
        battery: Option<String>,
    },
    Inconclusive {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledEstimate {
    pub label: String,
    pub estimate: Option<OrderEstimate>,
    pub status: String,
}

impl LabeledEstimate {
    /// Fit over the asymptotic window of `grid`; failures are kept as the
    /// status text.
    pub fn fit(label: impl Into<String>, samples: &[Sample], grid: &EpsGrid) -> Self {
        let label = label.into();
        match fit_order(samples, grid.asymptotic_window()) {
            Ok(e) => LabeledEstimate {
                label,
                estimate: Some(e),
                status: "ok".into(),
            },
            Err(e) => LabeledEstimate {
                label,
                estimate: None,
                status: e.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedVerdict {
    pub name: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub certificates: BTreeMap<String, i64>,
    pub metrics: BTreeMap<String, f64>,
    pub estimates: Vec<LabeledEstimate>,
    pub guard_skips: u64,
    pub notes: Vec<String>,
    pub components: Vec<NamedVerdict>,
}

impl Verdict {
    fn with_outcome(outcome: Outcome) -> Self {
        Verdict {
            outcome,
            certificates: BTreeMap::new(),
            metrics: BTreeMap::new(),
            estimates: Vec::new(),
            guard_skips: 0,
            notes: Vec::new(),
            components: Vec::new(),
        }
    }

    pub fn supported(max_order: u32, battery: Option<String>) -> Self {
        Self::with_outcome(Outcome::SupportedUpTo { max_order, battery })
    }

    pub fn refuted(witness: Witness) -> Self {
        Self::with_outcome(Outcome::RefutedWithWitness {
            witness: Box::new(witness),
        })
    }

    pub fn inconclusive(reason: impl Into<String>) -> Self {
        Self::with_outcome(Outcome::Inconclusive {
            reason: reason.into(),
        })
    }

    pub fn name(&self) -> &'static str {
        match self.outcome {
            Outcome::RefutedWithWitness { .. } => "RefutedWithWitness",
            Outcome::SupportedUpTo { .. } => "SupportedUpTo",
            Outcome::Inconclusive { .. } => "Inconclusive",
        }
    }

    pub fn is_supported(&self) -> bool {
        matches!(self.outcome, Outcome::SupportedUpTo { .. })
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self.outcome, Outcome::RefutedWithWitness { .. })
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self.outcome, Outcome::Inconclusive { .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match &self.outcome {
            Outcome::RefutedWithWitness { witness } => Some(witness),
            _ => None,
        }
    }

    pub fn max_order(&self) -> Option<u32> {
        match self.outcome {
            Outcome::SupportedUpTo { max_order, .. } => Some(max_order),
            _ => None,
        }
    }

    pub fn certificate(&self, key: &str) -> Option<i64> {
        self.certificates.get(key).copied()
    }

    pub fn certify(mut self, key: impl Into<String>, value: i64) -> Self {
        self.certificates.insert(key.into(), value);
        self
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    pub fn component(mut self, name: impl Into<String>, verdict: Verdict) -> Self {
        self.components.push(NamedVerdict {
            name: name.into(),
            verdict,
        });
        self
    }

    /// Every witness in this verdict and its components, depth first.
    pub fn all_witnesses(&self) -> Vec<(String, &Witness)> {
        let mut out = Vec::new();
        self.collect_witnesses("", &mut out);
        out
    }

    fn collect_witnesses<'a>(&'a self, path: &str, out: &mut Vec<(String, &'a Witness)>) {
        if let Some(w) = self.witness() {
            out.push((path.to_string(), w));
        }
        for c in &self.components {
            let p = if path.is_empty() {
                c.name.clone()
            } else {
                format!("{path}/{}", c.name)
            };
            c.verdict.collect_witnesses(&p, out);
        }
    }

    /// Number of order estimates, components included.
    pub fn estimate_count(&self) -> usize {
        self.estimates.len()
            + self
                .components
                .iter()
                .map(|c| c.verdict.estimate_count())
                .sum::<usize>()
    }
}

/// Compare a replayed magnitude with a recorded one.
pub fn replay_matches(recorded: f64, replayed: f64, tol: f64) -> bool {
    if recorded.is_nan() || replayed.is_nan() {
        return recorded.is_nan() && replayed.is_nan();
    }
    if recorded.is_infinite() || replayed.is_infinite() {
        return recorded == replayed;
    }
    (recorded - replayed).abs() <= tol * recorded.abs().max(1.0)
}
