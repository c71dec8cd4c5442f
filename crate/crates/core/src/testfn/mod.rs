//! Test functions with prescribed vanishing moments, scaling and
//! translation, quadrature, domains and distributional pairing.

pub mod distribution;
pub mod domain;
pub mod generator;
pub mod quadrature;

pub use distribution::{DistKind, DistributionSpec};
pub use domain::{CompactBox, Domain, OpenBox};
pub use generator::{
    generator_by_id, make_bump, make_moment_testfn, make_moment_testfn_with_nodes, moment_order,
    Generator, GeneratorKind, MomentCertificate, Registry, TestFunction, TfTag, ORDER_THRESHOLD,
    TOL_MOMENT,
};

/// `∫ f` over a box by tensorized Gauss–Legendre with `nodes` per axis.
pub fn quadrature(f: impl Fn(&[f64]) -> f64, lo: &[f64], hi: &[f64], nodes: usize) -> f64 {
    quadrature::integrate_box(f, lo, hi, nodes)
}
