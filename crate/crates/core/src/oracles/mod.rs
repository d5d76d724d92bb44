//! Calibrated stochastic stand-ins for the neural components.
//!
//! The localizer, the edge and cloud classifiers, and the difficulty
//! estimator are modeled by their observable statistics only. All draws
//! come from a [`SeededRng`], so identical inputs and seed give identical
//! outputs.

mod confusion;
mod difficulty;
mod localizer;
mod rng;

pub use confusion::{classify, classify_conditioned, ConfusionMatrix};
pub use difficulty::{
    assign_difficulty, estimate_difficulty, DifficultyDraw, DifficultyModel, FLAG_THRESHOLD,
};
pub use localizer::{localize, LocalizerModel};
pub use rng::{SeededRng, StreamKind};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("confusion matrix: {0}")]
    BadMatrix(String),
    #[error("class index {class} out of range for {count} classes")]
    BadClassIndex { class: usize, count: usize },
    #[error("`{field}` = {value} must be in {range}")]
    BadParameter {
        field: &'static str,
        value: f64,
        range: &'static str,
    },
}

pub(crate) fn check_probability(field: &'static str, value: f64) -> Result<(), OracleError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(OracleError::BadParameter {
            field,
            value,
            range: "[0, 1]",
        })
    }
}
