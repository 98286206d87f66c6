//! Finite-level operator-algebra toolkit for endomorphism-based measurement
//! models on UHF algebras.

pub mod algebra;
pub mod error;
pub mod gns;
pub mod instrument;
pub mod io;
pub mod matrix;
pub mod path;
pub mod random;
pub mod report;
pub mod sampling;
pub mod scenarios;
pub mod state;
pub mod uhf;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, C64};
