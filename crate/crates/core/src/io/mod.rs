//! Instance and result files, CSV export of Laguerre cells, and the
//! command-line front end.
//!
//! Files are JSON with rationals written as strings (`"3/7"`, `"-2"`,
//! `"0.125"`). Objects are parsed strictly: unknown keys are rejected and
//! every invariant (mass balance, distinct sites, connectivity) is checked
//! before a value is handed out.

mod cells;
pub mod cli;
mod instance;
mod result;

pub use cells::{export_cells, export_cells_from_result, potential_from_result};
pub use instance::{
    constraints_value, instance_from_value, measure_value, parse_instance, points_value, scalar_value, Instance,
    InstanceFile, SolverBlock,
};
pub use result::{
    energy_result, envelope_result, green_result, instance_hash, poisson_result, solve_result, verify_result,
    ResultFile, FORMAT_VERSION,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IoError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },
}
