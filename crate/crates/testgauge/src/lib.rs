//! File formats, report rendering and the `testgauge` command line on top
//! of [`testgauge_core`].

pub mod cli;
pub mod csv_io;
pub mod error;
pub mod formats;
pub mod report;

pub use cli::run_cli;
pub use csv_io::{parse_response_matrix, write_response_matrix, ParseOptions};
pub use error::{Error, Result};
pub use formats::{parse_format_sidecar, write_format_sidecar};
pub use report::{parse_report, render_report, AnalysisReport, RenderFormat};
