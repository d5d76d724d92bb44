//! Difficulty-aware edge-cloud collaborative sensing simulator.
//!
//! Objects found by an edge localizer are scored for difficulty; easy ones
//! are classified on the edge device and hard ones are cropped and sent to
//! a cloud classifier. The crate models that pipeline with calibrated
//! stochastic oracles and accounts for the bytes, joules, and milliseconds
//! it costs relative to shipping every frame to the cloud.
//!
//! - [`domain`]: boxes, proposals, frames, catalogs, platform and channel profiles
//! - [`modelmath`]: IoU/NMS, attention pooling, background-suppression and
//!   refinement losses, schedules (generic over [`Scalar`])
//! - [`oracles`]: seeded stand-ins for the localizer, classifiers, and
//!   difficulty estimator
//! - [`pipeline`]: per-frame routing state machine
//! - [`accounting`]: energy/bandwidth/latency ledgers and ratios
//! - [`harness`]: scenario configs, calibration, reports, sweeps

pub mod accounting;
pub mod domain;
pub mod harness;
pub mod modelmath;
pub mod oracles;
pub mod pipeline;
mod scalar;

pub use scalar::Scalar;

pub type BoundingBoxF32 = domain::BoundingBox<f32>;
pub type BoundingBoxF64 = domain::BoundingBox<f64>;
pub type Tensor3F32 = modelmath::Tensor3<f32>;
pub type Tensor3F64 = modelmath::Tensor3<f64>;
pub type EmbeddingMapF32 = modelmath::EmbeddingMap<f32>;
pub type EmbeddingMapF64 = modelmath::EmbeddingMap<f64>;
pub type ScoreMapF32 = modelmath::ScoreMap<f32>;
pub type ScoreMapF64 = modelmath::ScoreMap<f64>;
pub type AttentionBlockF32 = modelmath::AttentionBlock<f32>;
pub type AttentionBlockF64 = modelmath::AttentionBlock<f64>;
