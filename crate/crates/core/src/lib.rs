//! Layerwise QAOA state preparation toward `|0…0⟩`.
//!
//! * [`symcore`]: exact evolution in the `n + 1` dimensional Dicke basis.
//! * [`densecore`]: `2^n` statevector oracle, host of coherent phase noise.
//! * [`training`]: layerwise, global, cutoff-limited and noisy trainers.
//! * [`analysis`]: saturation detection and necessary-condition diagnostics.
//! * [`harness`]: seeded experiment runners behind the `satlab` CLI.

pub mod analysis;
pub mod densecore;
pub mod error;
pub mod harness;
pub mod symcore;
pub mod training;

pub use error::{Error, Result};
