//! Hilbert C*-modules, correspondences and their tensor algebras over
//! finite-dimensional C*-algebras, with numerical checks for Morita
//! equivalence of Hardy algebras and absolute continuity of their
//! representations.

pub mod accontinuity;
pub mod algebra;
pub mod correspondence;
pub mod error;
pub mod fock;
pub mod instances;
pub mod literal;
pub mod morita;
pub mod report;
pub mod representation;
pub mod scenario;

pub use algebra::{ComplexMatrix, ComplexVector, StarAlgebra, C64};
pub use correspondence::{Correspondence, CorrespondenceMap, EquivalenceBimodule, Quotient};
pub use error::{Error, Result};
pub use report::Residuals;
