//! Exact and floating-point arithmetic on simply connected nilpotent Lie
//! groups in exponential coordinates, symbolic checks on product
//! polynomials, and seeded Monte Carlo experiments for random walks.

pub mod algebra;
pub mod bch;
pub mod catalog;
pub mod error;
pub mod measures;
pub mod montecarlo;
pub mod oracle;
pub mod poly;
pub mod product;
pub mod rearrange;
pub mod report;
pub mod scalar;
pub mod ustat;

pub use algebra::{dilate, validate_algebra, Algebra, GradedBasis, Label, LieVector, StructureConstants, ValidationReport};
pub use bch::{build_group_law, translate_polynomials, GroupLawTable, Law, Translation};
pub use catalog::{lookup, GroupCatalogEntry};
pub use error::{Error, Result};
pub use oracle::matrix_oracle_product;
pub use poly::{Monomial, Polynomial, Var};
pub use scalar::{Rational, Ring, Scalar};

/// Point with exact rational coordinates.
pub type ExactVector = LieVector<Rational>;
/// Point with `f64` coordinates.
pub type FloatVector = LieVector<f64>;
/// Group law evaluated exactly.
pub type ExactLaw = Law<Rational>;
/// Group law evaluated in `f64`.
pub type FloatLaw = Law<f64>;
/// Group law evaluated on polynomial coordinates.
pub type SymbolicLaw = Law<Polynomial>;
