//! Numerical geometry of the Kepler problem and of Kähler metrics with
//! large symmetry groups: regularization maps, hyperkähler structures on
//! the Kepler manifold, Ricci-flat conifold profiles, and symplectic
//! (action-angle) coordinates with their Legendre-dual potentials.

// `!(a < b)` is used on purpose so that NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calabi_families;
pub mod error;
pub mod flows;
pub mod metrics;
pub mod numkit;
pub mod regularization;
pub mod structures;
pub mod toric_hessian;

pub use error::{GeomError, Result};
