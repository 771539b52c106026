//! Online classification from limited labels: siamese networks with
//! one-by-one active learning over class-balanced sliding-window queues,
//! the incremental and queue-based softmax baselines, synthetic drifting and
//! imbalanced streams, and prequential G-mean evaluation.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the precision for the common cases.

pub mod active;
pub mod config;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod learners;
pub mod memory;
pub mod nn;
pub mod plot;
pub mod scalar;
pub mod streamgen;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Instance64 = streamgen::Instance<f64>;
pub type Instance32 = streamgen::Instance<f32>;
pub type Mlp64 = nn::Mlp<f64>;
pub type Mlp32 = nn::Mlp<f32>;
pub type Radam64 = nn::Radam<f64>;
pub type Radam32 = nn::Radam<f32>;
pub type QueueStore64 = memory::QueueStore<f64>;
pub type QueueStore32 = memory::QueueStore<f32>;
pub type SiameseModel64 = learners::SiameseModel<f64>;
pub type SiameseModel32 = learners::SiameseModel<f32>;
pub type ActiSiamese64 = learners::ActiSiamese<f64>;
pub type ActiSiamese32 = learners::ActiSiamese<f32>;
pub type ActiQ64 = learners::ActiQ<f64>;
pub type ActiQ32 = learners::ActiQ<f32>;
pub type Incremental64 = learners::Incremental<f64>;
pub type Incremental32 = learners::Incremental<f32>;
