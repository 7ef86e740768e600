//! Selective inference after sequential model-based data collection.
//!
//! An acquisition algorithm (GP-UCB or TPE) queries a finite candidate set,
//! a data-dependent linear target `ηᵀμ` is chosen from the responses, and the
//! selection event is characterized exactly as an interval along a line in
//! response space. The resulting truncated-normal law gives p-values and
//! confidence intervals that are valid conditionally on the selection.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

pub mod adc;
pub mod candidates;
pub mod error;
pub mod geometry;
pub mod numerics;
pub mod pipeline;
pub mod scalar;
pub mod selective;
pub mod target;

pub use error::{Error, Result};
pub use scalar::Real;

pub type CandidateSet = candidates::CandidateSet<f64>;
pub type WindowIndexSet = candidates::WindowIndexSet<f64>;
pub type Algorithm = adc::Algorithm<f64>;
pub type GpUcbConfig = adc::GpUcbConfig<f64>;
pub type TpeConfig = adc::TpeConfig<f64>;
pub type ThresholdRule = adc::ThresholdRule<f64>;
pub type CollectedData = adc::CollectedData<f64>;
pub type TargetRule = target::TargetRule<f64>;
pub type TargetDescriptor = target::TargetDescriptor<f64>;
pub type LineSlice = geometry::LineSlice<f64>;
pub type LinearConstraint = geometry::LinearConstraint<f64>;
pub type Interval = geometry::Interval<f64>;
pub type IntervalSet = geometry::IntervalSet<f64>;
pub type TruncatedNormal = selective::TruncatedNormal<f64>;
pub type SelectiveResult = selective::SelectiveResult<f64>;
pub type ConfidenceInterval = selective::ConfidenceInterval<f64>;
pub type Problem<'a> = pipeline::Problem<'a, f64>;
pub type ObservedEvent = pipeline::ObservedEvent<f64>;
