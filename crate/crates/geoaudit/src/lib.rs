//! Shortcut auditing for tabular binary classifiers.
//!
//! A zero-hidden-layer logistic probe is trained on standardized features;
//! features whose absolute weight exceeds twice the mean absolute weight are
//! flagged as linearly exploitable shortcuts and pruned before the main
//! ReLU network is trained. Capacity sweeps locate the hidden width at which
//! the pruned model recovers plateau accuracy, and a counterfactual stress
//! harness measures prediction flip rates under targeted feature
//! interventions. L1 and a two-phase retraining baseline are included for
//! comparison.

pub mod auditor;
pub mod baselines;
pub mod capacity;
pub mod census_sim;
pub mod config;
pub mod dataprep;
pub mod error;
pub mod nncore;
pub mod pipeline;
pub mod report;
pub mod stresstest;

pub use error::{Error, Result};
