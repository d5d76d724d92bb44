//! Forward-only evaluation of the detector and classifier math on small
//! dense tensors: box overlap and suppression, attention pooling, the
//! background-suppression losses, temperature-scaled refinement, and the
//! training schedules.
//!
//! Everything here is generic over [`Scalar`](crate::Scalar) so the same
//! code runs in `f32` and `f64`.

mod attention;
mod background;
mod geometry;
mod localizer;
mod refinement;
mod tensor;

pub use attention::{
    apply_attention, attention_normalize, coordinate_pool, excite, global_avg_pool, sigmoid,
    AttentionBlock, AttentionDescriptors, ExcitationBlock,
};
pub use background::{
    bs_loss, column_scores, concat_selected, cross_entropy_loss, embedding_map, k_schedule,
    score_map, softmax, suppression_loss, topk_partition, BsHyperParams, EmbeddingColumn,
    EmbeddingMap, EmbeddingPartition, Reduction, ScoreMap, LOG_EPSILON,
};
pub use geometry::{iou, nms, Detection, ScoredBox};
pub use localizer::{localizer_loss, objectness_bce, smooth_l1, LocalizerLossParts};
pub use refinement::{
    backend_total_loss, log_softmax, refinement_loss, temperature_at_epoch, RefinementSchedule,
};
pub use tensor::{DenseLayer, Tensor3};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MathError {
    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },
    #[error("tensor dimensions must be non-zero, got {0:?}")]
    EmptyDims((usize, usize, usize)),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("attention normalizer sums to zero")]
    DegenerateNormalizer,
    #[error("k = {k} must be in 1..={columns}")]
    KTooLarge { k: usize, columns: usize },
    #[error("not a probability vector: {0}")]
    NotAProbabilityVector(String),
    #[error("temperature schedule is degenerate for initial temperature {0}")]
    DegenerateSchedule(f64),
    #[error("temperature must be finite and > 0, got {0}")]
    BadTemperature(f64),
    #[error("block index {0} is not in 1..=4")]
    BadBlockIndex(usize),
    #[error("IoU threshold {0} is not in (0, 1]")]
    BadThreshold(f64),
    #[error("loss weights must be finite and >= 0")]
    BadHyperParams,
    #[error("embedding map needs at least 2 rows and 1 column, got {rows}x{cols}")]
    BadEmbeddingShape { rows: usize, cols: usize },
}

pub(crate) fn shape_mismatch(expected: impl ToString, actual: impl ToString) -> MathError {
    MathError::ShapeMismatch {
        expected: expected.to_string(),
        actual: actual.to_string(),
    }
}
