//! Admissibility, branching multiplicities and reduction volumes for
//! anisotropic tori of p-adic symplectic groups.

pub mod error;
pub mod padic;

pub use error::{Error, Result};
pub use padic::{FieldElement, FiniteField, LocalField, Valuation};
pub mod cyclomod;
pub mod oracle;
pub mod torus;
pub mod admissible;
pub mod multiplicity;
