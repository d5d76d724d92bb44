use serde::{Deserialize, Serialize};

use super::{shape_mismatch, MathError, LOG_EPSILON};
use crate::scalar::Scalar;

/// Objectness and box-regression terms of the localizer loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct LocalizerLossParts<S: Scalar = f64> {
    l_obj: S,
    l_reg: S,
}

impl<S: Scalar> LocalizerLossParts<S> {
    pub fn new(l_obj: S, l_reg: S) -> Result<Self, MathError> {
        let ok = |v: S| v.is_finite() && v >= S::zero();
        if !(ok(l_obj) && ok(l_reg)) {
            return Err(MathError::NonFinite("localizer loss parts"));
        }
        Ok(Self { l_obj, l_reg })
    }

    /// Mean binary cross-entropy for objectness and mean smooth-L1
    /// (`beta = 1`) for box offsets.
    pub fn from_components(
        scores: &[S],
        labels: &[S],
        offsets: &[S],
        targets: &[S],
    ) -> Result<Self, MathError> {
        Self::new(
            objectness_bce(scores, labels)?,
            smooth_l1(offsets, targets, S::one())?,
        )
    }

    pub fn l_obj(&self) -> S {
        self.l_obj
    }

    pub fn l_reg(&self) -> S {
        self.l_reg
    }
}

pub fn localizer_loss<S: Scalar>(parts: &LocalizerLossParts<S>) -> S {
    parts.l_obj + parts.l_reg
}

/// Mean binary cross-entropy of predicted objectness against 0/1 labels.
pub fn objectness_bce<S: Scalar>(scores: &[S], labels: &[S]) -> Result<S, MathError> {
    if scores.len() != labels.len() {
        return Err(shape_mismatch(scores.len(), labels.len()));
    }
    if scores.is_empty() {
        return Ok(S::zero());
    }
    let eps = S::lit(LOG_EPSILON);
    let total = scores.iter().zip(labels).fold(S::zero(), |acc, (&p, &y)| {
        let p = p.max(eps).min(S::one() - eps);
        acc - (y * p.ln() + (S::one() - y) * (S::one() - p).ln())
    });
    Ok(total / S::from_count(scores.len()))
}

/// Mean smooth-L1 (Huber with threshold `beta`).
pub fn smooth_l1<S: Scalar>(pred: &[S], target: &[S], beta: S) -> Result<S, MathError> {
    if pred.len() != target.len() {
        return Err(shape_mismatch(pred.len(), target.len()));
    }
    if pred.is_empty() {
        return Ok(S::zero());
    }
    let half = S::lit(0.5);
    let total = pred.iter().zip(target).fold(S::zero(), |acc, (&p, &t)| {
        let d = (p - t).abs();
        acc + if d < beta {
            half * d * d / beta
        } else {
            d - half * beta
        }
    });
    Ok(total / S::from_count(pred.len()))
}
