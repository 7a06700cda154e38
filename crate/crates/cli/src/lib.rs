pub mod config;
pub mod error;
pub mod output;
pub mod sweep;

pub use config::{Mode, SweepConfig};
pub use error::{CliError, Result};
pub use sweep::{run_sweep, SweepResult, SweepRow};
