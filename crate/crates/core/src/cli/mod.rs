//! Batch command-line pipeline: instance formats, generators and the run
//! driver used by the `isingopt` binary.

pub mod formats;
pub mod generate;
pub mod run;

pub use formats::{parse_instance, Instance, InstanceFormat, ParseError, FORMAT_VERSION};
pub use generate::{generate, GeneratorKind, GeneratorSpec};
pub use run::{execute, run, Engine, InstanceSource, Report, ReportFormat, RunConfig, RunError};
