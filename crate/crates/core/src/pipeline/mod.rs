//! End-to-end detection experiments: dataset construction, detector
//! training and evaluation in the three transfer regimes, the hypothesis
//! tests and per-dimension feature statistics.

pub mod dataset;
pub mod desk;
pub mod experiment;
pub mod hypothesis;
pub mod statistics;

pub use dataset::{build_detection_dataset, BuildConfig, BuildSummary, DetectionDataset, Split};
pub use desk::{prepare_desk, run_desk, DeskArtifacts, DeskConfig, DeskReport};
pub use experiment::{run_experiment, train_detector, Case, ExperimentConfig, ExperimentReport};
pub use hypothesis::{hypothesis_suite, HypothesisConfig, HypothesisRow};
pub use statistics::{feature_statistics, pooled_separation, write_statistics_csv, StatRow};
