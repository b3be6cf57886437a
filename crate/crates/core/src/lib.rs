//! Phase, amplitude, overlap and expectation estimation on a dense
//! statevector simulator, with exact resource accounting.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod amp_overlap;
pub mod baseline;
pub mod confidence;
pub mod eea;
pub mod error;
pub mod experiment;
pub mod io;
pub mod ledger;
pub mod oracles;
pub mod pea;
pub mod statevec;

pub use error::{Error, Result};
pub use ledger::{ResourceLedger, UseCost};
pub use oracles::{EvolutionOracle, Oracle, StatePrep};
pub use statevec::{Basis, DenseUnitary, MeasurementOutcome, StateVector};
