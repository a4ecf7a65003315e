//! Configuration, ingestion, synthetic data, end-to-end runs and output.

pub mod config;
pub mod ingest;
pub mod output;
pub mod run;
pub mod synthetic;
pub mod trials;

pub use config::{CostWeightsMode, Lambda, Method, RunConfig};
pub use ingest::{ingest_csv, read_point_values, read_table, select_adjusted_features, TvRow};
pub use output::{emit_outputs, read_coupling};
pub use run::{run_repair, DataKind, DemoScorer, DistributionTable, RunInputs, RunOutput};
pub use synthetic::{generate_synthetic, SyntheticSpec};
pub use trials::{run_trials, standard_variants, summarize, Variant};
