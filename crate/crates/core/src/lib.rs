//! Exact solver and property checker for non-Archimedean Monge-Ampère
//! equations in the toric and curve settings.

pub mod polyhedra;
pub mod curve;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod scalar;
pub mod solver;
pub mod toric;
