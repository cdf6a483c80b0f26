//! Numerical laboratory for multiplication operators `M_ψ f = ψ f` on the
//! Bloch space, the little Bloch space and the Besov spaces of the unit disk.

pub mod error;
pub mod acceptance;
pub mod classify;
pub mod cli;
pub mod dynamics;
pub mod function;
pub mod norms;
pub mod quadrature;
pub mod report;

pub use error::{Error, Result};
pub use function::AnalyticFunction;
