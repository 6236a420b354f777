//! Denoising a noisy sensor field with local best-response dynamics, then
//! learning its decision boundary from a handful of label queries.
//!
//! The pipeline mirrors how the pieces are meant to be used together:
//!
//! 1. [`field`]: place sensors uniformly in the unit ball, label them with a
//!    target concept and corrupt the labels (independent flips or pockets).
//! 2. [`graph`]: connect sensors within the communication radius.
//! 3. [`dynamics`]: let every sensor play best response (majority or the
//!    conservative rule) under a synchronous or asynchronous schedule.
//! 4. [`learner`]: query a few sensors through a budgeted oracle and fit a
//!    separator with the margin-based active learner or a passive baseline.
//! 5. [`metrics`] and [`harness`]: measure and reproduce whole experiments.

pub mod csvio;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod graph;
pub mod harness;
pub mod learner;
pub mod metrics;
pub mod seed;

pub use error::{Error, Result};
pub use field::{Label, Point, SensorField, TargetConcept};
pub use graph::NeighborGraph;
