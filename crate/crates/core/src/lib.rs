//! Exact invariants of class VII surface data.
//!
//! * [`exact`]: big rationals and real quadratic numbers.
//! * [`cfpoly`]: the continued-fraction polynomial family and its identities.
//! * [`cs_solver`]: the cyclic Camacho-Sad system, its roots and torsion.
//! * [`surface`]: curve configurations, intersection matrices, anticanonical data.
//! * [`germ`]: contracting germ normal forms and index-one reduction.
//! * [`series`]: truncated bivariate power series for factorization checks.
//! * [`fixtures`]: fixture files with embedded expectations.

pub mod cfpoly;
pub mod cs_solver;
pub mod surface;
pub mod exact;
pub mod fixtures;
pub mod germ;
pub mod series;

pub use exact::{quad_solve, QuadraticNumber, Rational};
