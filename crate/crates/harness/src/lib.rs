//! Experiment orchestration for the 2-opt library: sweep configs and CSV
//! output, least-squares fits, verification suites and the `twopt` CLI.

pub mod cli;
pub mod config;
pub mod error;
pub mod fit;
pub mod ratio;
pub mod sweep;
pub mod verify;

pub use config::{Model, OptMode, OriginSource, SweepConfig};
pub use error::{HarnessError, Result};
pub use fit::{scaling_fit, Fit};
pub use sweep::{replay, run_sweep, SweepRow};
pub use verify::{verify_suite, Suite, SuiteReport};
