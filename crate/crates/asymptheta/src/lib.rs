//! Exact engine for piecewise quasi-polynomials on lattices, the point-mass
//! distributions they define, and their asymptotic expansions.

pub mod catalog;
pub mod checks;
pub mod distributions;
pub mod error;
pub mod expansion;
pub mod lattice;
pub mod linalg;
pub mod oracle;
pub mod piecewise;
pub mod polyhedron;
pub mod pushforward;
pub mod quasipoly;
pub mod scalars;
pub mod scene;
pub mod serialize;

pub use error::{Error, Result};
