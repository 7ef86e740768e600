//! Monte Carlo experiments for post-ADC selective inference: synthetic
//! objectives, replicate orchestration, aggregation and real-data bootstrap.

pub mod config;
pub mod data;
pub mod objective;
pub mod output;
pub mod replicate;
pub mod sweep;
pub mod uniformity;

pub use config::{apply_overrides, expand_grid, parse_config, ConfigGrid, ExperimentConfig, GridPoint};
pub use data::{load_real_csv, RealData};
pub use objective::{synth_objective, Family, ObjectiveSpec};
pub use replicate::{
    bootstrap_replicate, collect_data, replicate_seed, run_replicate, MethodRow, Prepared, ReplicateDraw,
    ReplicateRecord,
};
pub use sweep::{aggregate, run_replicates, run_sweep, AggregateRow, ConfigRun};
pub use uniformity::{uniformity_check, UniformityReport};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] postadc_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("data error: {0}")]
    Data(String),
}
