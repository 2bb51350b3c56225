//! Fast matrix multiplication schemes in LRP form: exact arithmetic,
//! straight-line programs, recursive evaluation and accuracy tooling.

pub mod accuracy;
pub mod bench;
pub mod catalog;
pub mod cli;
pub mod dyadic;
pub mod element;
pub mod error;
pub mod lrp;
pub mod matrix;
pub mod recursion;
pub mod slp;
pub mod sms;

pub use catalog::{builtin, AltBasisScheme, SchemeBundle};
pub use dyadic::Dyadic;
pub use element::{Element, Linear};
pub use error::{FmmError, Result};
pub use lrp::{apply_one_level, validate_scheme, LrpScheme, ValidationReport};
pub use matrix::{classical_multiply, CoeffMatrix, Matrix};
pub use slp::{OpCount, SlpProgram};
pub use recursion::{multiply, multiply_alt, RecursionPlan};
