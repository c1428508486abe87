//! Orchestration: dataset generation, source pretraining, the adaptation
//! loop, reconstruction and evaluation.

mod adaptation;
mod config;
mod data;
mod experiment;
mod log;
mod optim;
mod pretrain;
mod reconstruct;

pub use adaptation::{adapt, AdaptOutcome};
pub use config::{AdaptLoopConfig, BatchConfig, DataConfig, EvalConfig, OptimConfig, PretrainConfig, RunConfig};
pub use data::{Dataset, SourceShape, TargetShape, TestShape};
pub use experiment::{evaluate, mesh_bytes, monitor_cd, run_experiment, ExperimentOutcome, VariantResult, PRETRAINED};
pub use log::{pretrain_csv, EpochLog, PretrainEpoch, TrainLog};
pub use optim::RmsProp;
pub use pretrain::{accuracy, pretrain_source, source_batch, source_holdout, PretrainOutcome};
pub use reconstruct::{reconstruct, Reconstruction};

/// Stream identifiers for `derive_seed`, one per consumer of randomness.
pub mod stream {
    pub const INIT: u64 = 1;
    pub const HOLDOUT: u64 = 2;
    pub const PRETRAIN_BATCH: u64 = 3;
    pub const ADAPT_SOURCE: u64 = 4;
    pub const ADAPT_TARGET: u64 = 5;
    pub const POOL: u64 = 6;
    pub const REFERENCE: u64 = 7;
    pub const EVAL: u64 = 8;
}
