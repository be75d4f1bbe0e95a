//! Metrics, complexity counting, cross-validation orchestration, and
//! report emission.

pub mod crossval;
pub mod macs;
pub mod metrics;
pub mod report;

pub use crossval::{crossval, EvalReport, FoldRates};
pub use macs::{count_macs, MacReport, MacStage};
pub use metrics::{roc_auc, tune_threshold, verification_rate, ThresholdPolicy};
