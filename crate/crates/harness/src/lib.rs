//! Config-driven harness around the copula functional inference core:
//! seeded simulation studies, real-data analysis and result persistence.

pub mod config;
pub mod error;
pub mod presets;
pub mod results;
pub mod study;

pub use config::{load_config, load_config_str, ExperimentConfig, MarginalMode};
pub use error::{HarnessError, Result};
pub use results::{
    aggregate, read_repetitions, render_report, write_results, AggregateRow, Failure,
    PosteriorDrawSet, RepRecord, StudyResult,
};
pub use study::{load_marginal_source, read_data_csv, run_real_data, run_study};
