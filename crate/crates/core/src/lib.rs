//! Generalized functions in Colombeau algebras.
//!
//! The crate builds test functions with vanishing moments, embeds
//! distributions into the special, elementary full and diffeomorphism
//! invariant algebras, and turns the asymptotic conditions of those algebras
//! into empirical verdicts over ε-grids and finite test-function batteries.
//!
//! * [`asymptotics`]: ε-grids, Landau checks and order fits.
//! * [`testfn`]: test functions, quadrature, domains, pairings.
//! * [`gs`]: nets, generalized numbers and points of the special algebra.
//! * [`ge`]: base-space elements, embeddings, point values, invertibility.
//! * [`gd`]: test-object nets and the two point-evaluation formalisms.

pub mod asymptotics;
pub mod error;
pub mod expr;
pub mod gd;
pub mod ge;
pub mod gs;
pub mod jet;
pub mod multiindex;
pub mod real;
pub(crate) mod sweep;
pub mod testfn;
pub mod verdict;

pub use error::{CoreError, Result};
pub use num_complex::Complex64;
