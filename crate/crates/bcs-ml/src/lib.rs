//! Learning layer: a from-scratch gradient-boosted cost predictor over
//! variable-frequency spectra, and a predictor-guided simulated annealer
//! that searches the ordering space for cheap solves.

pub mod error;
pub mod gbt;
pub mod sa;

pub use error::MlError;
pub use gbt::{
    rmse, train, FeatureSampling, GbtModel, Node, RegressionTree, ResidualStats, TargetTransform,
    TrainConfig, TrainHistory, Trained, MODEL_FORMAT_VERSION,
};
pub use sa::{
    accept_probability, adaptive_cool, guided_neighbors, optimize, optimize_with, ordering_hash,
    Candidate, Confidence, OptimizeResult, OrderingCost, SaConfig, SaTrace, SpectrumCost,
    TraceRecord,
};
