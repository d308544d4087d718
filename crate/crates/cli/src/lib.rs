//! Library side of the `umaf` command-line tool: report schema and the
//! pipelines behind each subcommand.

pub mod pipeline;
pub mod report;

pub use pipeline::SolveOptions;
pub use report::{BenchRecord, SolveReport};
