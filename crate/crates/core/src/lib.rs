//! Operator norms, norm-attainment sets, extreme contractions and uniform
//! Bishop-Phelps-Bollobás approximants on finite-dimensional ℓp spaces.

pub mod approximants;
pub mod bpbverify;
pub mod classify;
pub mod demo;
pub mod error;
pub mod numeric;
pub mod operators;
pub mod sampling;
pub mod spaces;
pub mod tol;

pub use error::{Error, Result};
pub use operators::{AttainmentSet, OperatorMatrix};
pub use spaces::{Exponent, Face, Point, SpaceSpec};
