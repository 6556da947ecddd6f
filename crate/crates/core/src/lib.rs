//! Exact ground state, reduced density matrices and entanglement of the
//! two-species fermionic harmonium, with a brute-force verification layer.

pub mod correlations;
pub mod entanglement;
pub mod error;
pub mod gausspoly;
pub mod model;
pub mod oracle;
pub mod rdm;

pub use error::{Error, Result};
