//! Exact arithmetic for Voronoi's perfect forms and the explicit torsion bounds
//! they feed: shortest vectors, perfect-cone facets and neighbours, the
//! quotient cell complex, Smith normal forms, the log-scale constants
//! `A(N) .. v(n)`, and the Bernoulli / cyclotomic-unit tests for Vandiver's
//! conjecture.

pub mod certified;
pub mod complex;
pub mod constants;
pub mod cyclotomic;
pub mod error;
pub mod exact_forms;
pub mod linalg;
pub mod minima;
pub mod torsion;
pub mod voronoi;

pub use complex::ChainComplexZ;
pub use error::{Error, Result};
pub use exact_forms::{Definiteness, IntMat, LatticeVector, SymForm};
pub use minima::MinVecSet;

pub type Int = num_bigint::BigInt;
pub type Rat = num_rational::BigRational;
