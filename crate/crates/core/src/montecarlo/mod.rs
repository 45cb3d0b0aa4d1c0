//! Seeded Monte Carlo experiments on random walks.

pub mod config;
pub mod estimate;
pub mod experiments;
pub mod regression;
pub mod rng;
pub mod sublevel;
pub mod testfn;
pub mod walk;
pub mod window;

use serde::{Deserialize, Serialize};

pub use config::{run_experiment, ExperimentConfig, ExperimentKind, ExperimentOutput};
pub use estimate::{Accumulator, ComplexEstimate, EstimateWithError};
pub use regression::{loglog_fit, weighted_fit, SlopeFit};
pub use rng::StreamKey;
pub use testfn::{TestFunctionKind, TestFunctionSpec};
pub use walk::{char_fn_estimate, exact_char_fn, sample_commutator_measure, walk_functional, WalkSetup};
pub use window::FrequencyWindow;

/// One output row; column order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub experiment_id: String,
    pub group: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub quantity: String,
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

pub const CSV_COLUMNS: [&str; 8] = ["experiment_id", "group", "N", "quantity", "mean", "std_error", "samples", "seed"];
