//! Experiment harness: random instance generation, dataset collection for
//! the cost predictor, statistical analysis of spectra vs solving cost, and
//! verification experiments for the correlation law and the guided
//! annealer's end-to-end gains.

pub mod analyze;
pub mod bench;
pub mod dataset;
pub mod error;
pub mod gen;
pub mod report;
pub mod stats;
pub mod verify;

pub use analyze::{analyze, AnalysisReport, ClusterSummary, FeatureCorrelation};
pub use bench::{run_bench, BenchCell, BenchPlan, BenchReport, Method};
pub use dataset::{
    audit_dataset, collect_dataset, read_dataset, schedule, training_pairs, write_records,
    CollectPlan, DatasetRecord, Schedule,
};
pub use error::HarnessError;
pub use gen::{brute_force_solve, gen_random_system, InstanceSpec};
pub use verify::{
    end_to_end_gain, verify_improvement, verify_lemma1, GainReport, ImprovementPlan,
    Lemma1Report, Lemma1Row, PredictorSource, SystemGain, TheoremReport, TrendRow,
};
