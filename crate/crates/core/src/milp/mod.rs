//! MILP data model, validation and MPS input/output.

mod model;
mod mps;
mod validate;

pub use model::{BasicStats, CooMatrix, MilpInstance, Sense, Triplet, VarKind};
pub(crate) use model::hex;
pub use mps::{parse_mps, write_mps, MpsError};
pub use validate::{validate, Issue, IssueCode, Location, ValidationReport};
