//! The elementary full algebra.
//!
//! Representatives `R(φ, x)` are operation trees over distribution
//! embeddings, closed forms and generalized numbers ([`EFunc`]). Quantifiers
//! over `A_q(ℝⁿ)` run over a finite [`Battery`] of certified test functions
//! `φ_0, …, φ_{q_max}`, scaled along an ε-grid. Generalized numbers and
//! points ([`GenNumberGe`], [`GenPointGe`]) read the scale and generator
//! tags of their argument, so the case splits of the witness construction
//! are exact.

mod efunc;
mod number;
mod verdicts;

use serde::{Deserialize, Serialize};

pub(crate) use efunc::tag_ctx;
pub use efunc::{EFunc, ENode, DEFAULT_EFUNC_ORDER};
pub use number::{
    invert_number, zero_divisor_partner, GenNumberGe, GenPointGe, MatrixGe, NumNode,
    MAX_COFACTOR_SIZE,
};
pub use verdicts::*;
pub(crate) use verdicts::{moderate_on, negligible_on, Probes};

use crate::asymptotics::EpsGrid;
use crate::error::{CoreError, Result};
use crate::testfn::generator::default_nodes;
use crate::testfn::{make_moment_testfn_with_nodes, Registry, TestFunction};

/// Finite stand-in for `∀φ ∈ A_q(ℝⁿ)`: one certified `φ_q` per order.
#[derive(Debug, Clone)]
pub struct Battery {
    pub n: usize,
    pub rho: f64,
    pub q_max: u32,
    pub grid: EpsGrid,
    pub nodes: usize,
    generators: Vec<TestFunction>,
    registry: Registry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorManifest {
    pub q: u32,
    pub id: String,
    pub order: u32,
    pub next_moment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryManifest {
    pub id: String,
    pub n: usize,
    pub rho: f64,
    pub q_max: u32,
    pub nodes: usize,
    pub grid: EpsGrid,
    pub generators: Vec<GeneratorManifest>,
}

impl Battery {
    pub fn new(n: usize, q_max: u32, rho: f64, grid: EpsGrid) -> Result<Self> {
        Self::with_nodes(n, q_max, rho, grid, default_nodes(n))
    }

    pub fn with_nodes(n: usize, q_max: u32, rho: f64, grid: EpsGrid, nodes: usize) -> Result<Self> {
        let mut generators = Vec::new();
        let mut registry = Registry::new();
        for q in 0..=q_max {
            let phi = make_moment_testfn_with_nodes(n, q, 1, rho, nodes)?;
            let cert = phi.certified_order();
            if cert.order != q {
                return Err(CoreError::InvalidArgument(format!(
                    "generator {} certifies order {} instead of {q}",
                    phi.id(),
                    cert.order
                )));
            }
            registry.register(&phi)?;
            generators.push(phi);
        }
        Ok(Battery {
            n,
            rho,
            q_max,
            grid,
            nodes,
            generators,
            registry,
        })
    }

    pub fn id(&self) -> String {
        format!(
            "battery:n{}:q0-{}:r{:?}:g{}:{}",
            self.n,
            self.q_max,
            self.rho,
            self.nodes,
            self.grid.label()
        )
    }

    pub fn phi(&self, q: u32) -> &TestFunction {
        &self.generators[q as usize]
    }

    pub fn generators(&self) -> &[TestFunction] {
        &self.generators
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    /// `S_ε φ_q`.
    pub fn scaled(&self, q: u32, eps: f64) -> TestFunction {
        self.phi(q).scaled(eps).expect("grid values are positive")
    }

    pub fn orders(&self) -> std::ops::RangeInclusive<u32> {
        0..=self.q_max
    }

    pub fn manifest(&self) -> BatteryManifest {
        BatteryManifest {
            id: self.id(),
            n: self.n,
            rho: self.rho,
            q_max: self.q_max,
            nodes: self.nodes,
            grid: self.grid.clone(),
            generators: self
                .generators
                .iter()
                .enumerate()
                .map(|(q, phi)| {
                    let c = phi.certified_order();
                    GeneratorManifest {
                        q: q as u32,
                        id: phi.id().to_string(),
                        order: c.order,
                        next_moment: c.next_moment,
                    }
                })
                .collect(),
        }
    }
}
