//! Curvature functionals on finite metric spaces and sampled curves.
//!
//! Menger curvature and the triangle excess `∂` on triples, Jones beta numbers
//! over multiresolution ball families, the net-graph / doubled Euler tour
//! parameterization of connected samples, and a harness that evaluates both
//! sides of the associated length inequalities.

pub mod beta;
pub mod curvature;
pub mod curves;
pub mod error;
pub mod generators;
pub mod io;
pub mod metric;
pub mod nets;
pub mod spanning;
pub mod triples;
pub mod verify;

pub use error::{Error, Result};
