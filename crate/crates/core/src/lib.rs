//! Training toolkit for small, class-imbalanced datasets.
//!
//! The crate bundles four pieces that are usually scattered across a training
//! codebase:
//!
//! - [`imaging`] and [`policy`]: a RandAugment variant that alternates between
//!   photometric and geometric transforms, each executed with a shared
//!   probability and a random in-range magnitude.
//! - [`loss`]: sigmoid focal losses with class-count weighting raised to a
//!   tunable exponent, and an outlier clamp that freezes the loss of samples
//!   whose transformed probability falls under a threshold.
//! - [`schedule`]: the cumulative re-weighting curve that moves the weighting
//!   exponent from 0 to its terminal value, plus step learning-rate decay.
//! - [`metrics`], [`datasets`] and [`trainer`]: evaluation, manifests, and a
//!   small MLP trainer that drives the losses end to end.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the bottom of this file fix the common `f64` instantiations.

pub mod datasets;
pub mod error;
pub mod format;
pub mod imaging;
pub mod loss;
pub mod metrics;
pub mod policy;
pub mod rng;
pub mod scalar;
pub mod schedule;
pub mod trainer;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type LossConfig64 = loss::LossConfig<f64>;
pub type LossOutput64 = loss::LossOutput<f64>;
pub type ScheduleConfig64 = schedule::ScheduleConfig<f64>;
pub type ModelParams64 = trainer::ModelParams<f64>;
pub type TrainConfig64 = trainer::TrainConfig<f64>;
pub type Dataset64 = trainer::Dataset<f64>;

pub type LossConfig32 = loss::LossConfig<f32>;
pub type ModelParams32 = trainer::ModelParams<f32>;
