//! File formats: Matrix Market instances, JSON weights, run reports.

pub mod mtx;
pub mod report;
pub mod weights;

pub use mtx::{parse_matrix_market, read_matrix_market, to_matrix_market, write_matrix_market};
pub use report::{trace_csv, write_report, ReportFormat, RunReport};
pub use weights::{parse_weights, read_weights, weights_json, write_weights};
