//! Scenario files: schema, loading and overrides.

use std::collections::BTreeMap;
use std::path::Path;

use colombeau_core::verdict::Config;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Largest accepted order parameters.
pub const MAX_Q: u32 = 12;
pub const MAX_M0: u32 = 40;
pub const MAX_GRID_EXP: u32 = 60;
pub const MAX_SAMPLE_PAIRS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub domain: DomainSpec,
    pub battery: BatterySpec,
    #[serde(default)]
    pub config: Config,
    #[serde(default)]
    pub objects: BTreeMap<String, ObjectSpec>,
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub n: usize,
    pub boxes: Vec<BoxSpec>,
}

/// An open box, or a compact box when `points` is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    #[serde(default)]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "half")]
    pub base: f64,
    pub start: u32,
    pub end: u32,
}

fn half() -> f64 {
    0.5
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatterySpec {
    pub q_max: u32,
    #[serde(default = "one")]
    pub rho: f64,
    pub grid: GridSpec,
    #[serde(default)]
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default)]
    pub formats: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistName {
    Delta,
    Heaviside,
    Smooth,
    LocallyIntegrable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpName {
    Add,
    Sub,
    Mul,
    Neg,
    Scale,
    Derive,
    Invert,
    Partner,
    PointValue,
}

/// Named objects. Operation nodes reference other objects by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectSpec {
    /// A distribution `u`, optionally differentiated along `derivative`.
    Distribution {
        dist: DistName,
        #[serde(default)]
        f: Option<String>,
        #[serde(default)]
        derivative: Vec<usize>,
    },
    /// An element `R(φ, x)` of the full algebra.
    Efunc {
        #[serde(default)]
        embed: Option<String>,
        #[serde(default)]
        formula: Option<String>,
        #[serde(default)]
        rho: Option<String>,
        #[serde(default)]
        op: Option<OpName>,
        #[serde(default)]
        args: Vec<String>,
        #[serde(default)]
        c: Option<f64>,
        #[serde(default)]
        axis: Option<usize>,
        #[serde(default)]
        budget: Option<u32>,
    },
    /// A generalized number `r(φ)`.
    Number {
        #[serde(default)]
        expr: Option<String>,
        #[serde(default)]
        op: Option<OpName>,
        #[serde(default)]
        args: Vec<String>,
        #[serde(default)]
        point: Option<String>,
    },
    /// A compactly supported generalized point `X(φ)`, given by closed
    /// forms or built from the evidence of a target element.
    Point {
        #[serde(default)]
        coords: Vec<String>,
        #[serde(default)]
        support: Option<BoxSpec>,
        #[serde(default)]
        evidence: Option<EvidenceSpec>,
    },
    Matrix {
        rows: Vec<Vec<String>>,
    },
    /// A net `u_ε(x)` of the special algebra.
    Net {
        expr: String,
        #[serde(default)]
        max_order: Option<u32>,
    },
    /// A point `x_ε` of the special algebra.
    GsPoint {
        coords: Vec<String>,
        #[serde(default)]
        support: Option<BoxSpec>,
        #[serde(default = "one")]
        eta: f64,
    },
    /// A test-object net `φ(ε, x) = S_{σ(ε, x)} φ_q`.
    TestNet {
        q: u32,
        sigma: String,
    },
    /// A point `X(φ, x)` of the diffeomorphism-invariant algebra.
    GdPoint {
        coords: Vec<String>,
        support: BoxSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceSpec {
    pub target: String,
    pub k: BoxSpec,
    pub m0: u32,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    GsModerate,
    GsNegligible,
    GsWitnessSearch,
    GsConstant,
    GsPointValue,
    GeModerate,
    GeNegligible,
    Characterization,
    StrictlyNonzero,
    NumberModerate,
    NumberNegligible,
    Invertible,
    Leq,
    Nondegenerate,
    GeConstant,
    Profile,
    GdModerate,
    GdNegligible,
    GdConstancy,
    GdSpotCheck,
}

impl TaskKind {
    pub fn name(self) -> String {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub name: String,
    pub kind: TaskKind,
    pub target: String,
    /// Second operand: the right side of `leq`, the point of `ge_constant`
    /// and `gs_point_value`.
    #[serde(default)]
    pub other: Option<String>,
    #[serde(default)]
    pub k: Option<BoxSpec>,
    #[serde(default)]
    pub k2: Option<BoxSpec>,
    #[serde(default)]
    pub ks: Vec<BoxSpec>,
    #[serde(default)]
    pub alpha_max: u32,
    #[serde(default)]
    pub m0: Option<u32>,
    /// Test-object nets; the battery's constant nets when empty.
    #[serde(default)]
    pub nets: Vec<String>,
    /// Evaluation point of `profile`.
    #[serde(default)]
    pub x: Option<Vec<f64>>,
    /// Value subtracted in `profile`.
    #[serde(default)]
    pub subtract: Option<f64>,
    /// Noise floor of `profile`: fit only the leading run above it.
    #[serde(default)]
    pub floor: Option<f64>,
    #[serde(default)]
    pub orders: Vec<u32>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub samples: Option<usize>,
}

/// Command-line overrides applied after loading.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub grid_start: Option<u32>,
    pub grid_end: Option<u32>,
    pub q_max: Option<u32>,
}

impl Scenario {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| CliError::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })?;
        if s.schema != SCHEMA_VERSION {
            return Err(CliError::Schema(s.schema));
        }
        s.check_bounds()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(v) = o.grid_start {
            self.battery.grid.start = v;
        }
        if let Some(v) = o.grid_end {
            self.battery.grid.end = v;
        }
        if let Some(v) = o.q_max {
            self.battery.q_max = v;
        }
        self.check_bounds()
    }

    fn check_bounds(&self) -> Result<()> {
        let bound = |ok: bool, what: String| {
            if ok {
                Ok(())
            } else {
                Err(CliError::Bound(what))
            }
        };
        bound(
            self.battery.q_max <= MAX_Q,
            format!("battery.q_max = {} exceeds {MAX_Q}", self.battery.q_max),
        )?;
        bound(
            self.battery.grid.end <= MAX_GRID_EXP,
            format!(
                "battery.grid.end = {} exceeds {MAX_GRID_EXP}",
                self.battery.grid.end
            ),
        )?;
        bound(
            self.config.n_max <= 64,
            format!("config.n_max = {} exceeds 64", self.config.n_max),
        )?;
        bound(
            self.config.m_max <= MAX_M0,
            format!("config.m_max = {} exceeds {MAX_M0}", self.config.m_max),
        )?;
        let mut names = std::collections::BTreeSet::new();
        for t in &self.tasks {
            if !names.insert(&t.name) {
                return Err(CliError::Bound(format!("duplicate task name {}", t.name)));
            }
            if let Some(m0) = t.m0 {
                bound(
                    m0 <= MAX_M0,
                    format!("task {}: m0 = {m0} exceeds {MAX_M0}", t.name),
                )?;
            }
            bound(
                t.alpha_max <= 4,
                format!("task {}: alpha_max = {} exceeds 4", t.name, t.alpha_max),
            )?;
            bound(
                t.samples.unwrap_or(0) <= MAX_SAMPLE_PAIRS,
                format!("task {}: samples exceeds {MAX_SAMPLE_PAIRS}", t.name),
            )?;
            if let Some(q) = t.orders.iter().find(|&&q| q > self.battery.q_max) {
                return Err(CliError::Bound(format!(
                    "task {}: order {q} exceeds battery.q_max",
                    t.name
                )));
            }
        }
        for (name, o) in &self.objects {
            if let ObjectSpec::TestNet { q, .. } = o {
                bound(
                    *q <= self.battery.q_max,
                    format!("object {name}: q = {q} exceeds battery.q_max"),
                )?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_scenario_parses() {
        for (name, text) in crate::BUNDLED {
            let s = Scenario::parse(text, name).unwrap();
            assert_eq!(&s.name, name);
        }
    }

    #[test]
    fn bounds_are_enforced() {
        let (_, text) = crate::BUNDLED[0];
        let too_deep = text.replace("q_max = 4", "q_max = 13");
        assert!(matches!(
            Scenario::parse(&too_deep, "x"),
            Err(CliError::Bound(_))
        ));
        let dup = format!(
            "{text}\n[[tasks]]\nname = \"delta_rate\"\nkind = \"profile\"\ntarget = \"delta\"\n"
        );
        assert!(matches!(
            Scenario::parse(&dup, "x"),
            Err(CliError::Bound(_))
        ));
    }
}
