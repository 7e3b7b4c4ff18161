//! Discrete speech-unit stream toolkit.
//!
//! - [`units`]: frame-level and deduplicated unit sequences, run-length collapse/expand.
//! - [`lengthreg`]: duration regulation, including the bounded regulator that
//!   makes the realized length equal a target frame budget.
//! - [`quantize`]: k-means codebooks over feature frames, purity and NMI.
//! - [`metrics`]: LR, LC@k, corpus BLEU and the synthesizer loss terms.
//! - [`schedule`]: 20 ms audio / 40 ms video timelines and reference-frame allocation.
//! - [`harness`]: synthetic corpora, length-control comparisons and cross-checks.
//! - [`io`] and [`cli`]: file formats and the `unitkit` command.

pub mod cli;
pub mod error;
pub mod harness;
pub mod io;
pub mod lengthreg;
pub mod metrics;
pub mod quantize;
pub mod schedule;
pub mod units;

pub use error::{Error, Result};
pub use lengthreg::{
    allocate_proportional, bound_durations, early_stop, fit_duration_table, integerize_bounded,
    predict_durations, BoundedAllocation, DurationTable, RegulationMode,
};
pub use quantize::{kmeans_fit, quantize_assign, Codebook, FeatureMatrix};
pub use units::{collapse, expand, ContinuousUnitSeq, OrigUnitSeq, UnitId};
