//! Numerical laboratory for modulated ergodic Hilbert transforms.
//!
//! The crate is organized by subsystem:
//!
//! - [`sequences`]: two-sided complex modulating sequences and their combinators.
//! - [`rates`]: prefix-sum and exponential-sum rate conditions (`(*)`, `M_α`, `A_α`).
//! - [`dynamics`]: invertible measure-preserving systems with exact orbit evaluation.
//! - [`transform`]: partial sums `Σ' a_k T^k f(x) / k`, Abel decomposition, maximal
//!   functions and convergence diagnostics.
//! - [`envelope`]: the slowly decaying cosine-coefficient construction and its
//!   Dirichlet/Fejér resummation.
//! - [`spectral`]: correlations, `Γ` on root-of-unity grids, atoms and resonances.
//! - [`process`]: admissible processes, truncated approximants and the `‖·‖_α` seminorm.

// `!(x >= lo)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod envelope;
mod error;
pub mod grid;
pub mod process;
pub mod rates;
pub mod sequences;
pub mod spectral;
pub mod sum;
pub mod transform;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
