//! Resource usage analysis for MOOC step-activity logs.
//!
//! The crate turns a step-activity export into per-learner traces, finds
//! each learner's dropout point and derives seven per-resource features
//! (`active`, `drop`, `skip`, `peek`, `early`, `late`, `back`). An
//! independent alignment against a sequential process model with drop
//! shortcuts recomputes dropout and order flags for comparison.
//!
//! ```
//! use stepusage::{aggregate_features, build_cohort, derive_curriculum, parse_step_activity, AnalysisConfig};
//!
//! let csv = "learner_id,resource,first_visited_at,last_completed_at\n\
//!            learner1,1.1,2016-07-11 00:02:28 UTC,2016-07-11 00:12:54 UTC\n\
//!            learner1,1.2,2016-07-11 00:38:20 UTC,2016-07-11 00:40:24 UTC\n";
//! let (log, errors) = parse_step_activity(csv.as_bytes()).unwrap();
//! assert!(errors.is_empty());
//! let curriculum = derive_curriculum(&log).unwrap();
//! let cohort = build_cohort(&log, &curriculum, &AnalysisConfig::default()).unwrap();
//! let table = aggregate_features(&cohort);
//! assert_eq!(table.rows[1].drop, Some(1.0));
//! ```

pub mod alignment;
pub mod error;
pub mod features;
pub mod ingest;
pub mod pipeline;
pub mod report;
pub mod synth;
pub mod traces;

pub use alignment::{align, build_model, compare, Alignment, AlignmentTable, ComparisonReport, SequentialDropModel};
pub use error::{Error, Result};
pub use features::{aggregate_features, dropout_point, FeatureTable, LearnerFeatures, OrderClass, ResourceFeatureRow};
pub use ingest::{derive_curriculum, load_curriculum, parse_step_activity, Curriculum, EventLog, ResourceId, RowError};
pub use synth::{generate_cohort, GeneratorParams, GroundTruth};
pub use traces::{build_cohort, cohort_stats, AnalysisConfig, Cohort, Fraction, LearnerTrace};
