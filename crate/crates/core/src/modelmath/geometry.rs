use serde::{Deserialize, Serialize};

use super::MathError;
use crate::domain::{BoundingBox, Proposal};
use crate::scalar::Scalar;

/// Intersection over union; `0` for disjoint boxes.
pub fn iou<S: Scalar>(a: &BoundingBox<S>, b: &BoundingBox<S>) -> S {
    let inter = a.intersection_area(b);
    if inter <= S::zero() {
        return S::zero();
    }
    let union = a.area() + b.area() - inter;
    (inter / union).min(S::one())
}

/// Anything with a box and a confidence that NMS can rank.
pub trait Detection<S: Scalar> {
    fn bbox(&self) -> &BoundingBox<S>;
    fn score(&self) -> S;
}

impl Detection<f64> for Proposal {
    fn bbox(&self) -> &BoundingBox<f64> {
        Proposal::bbox(self)
    }

    fn score(&self) -> f64 {
        self.objectness()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ScoredBox<S: Scalar = f64> {
    pub bbox: BoundingBox<S>,
    pub score: S,
}

impl<S: Scalar> Detection<S> for ScoredBox<S> {
    fn bbox(&self) -> &BoundingBox<S> {
        &self.bbox
    }

    fn score(&self) -> S {
        self.score
    }
}

/// Greedy non-maximum suppression.
///
/// Keeps the highest-scoring remaining detection and discards every other
/// remaining detection whose IoU with it exceeds `iou_threshold`. Output is
/// in descending score order; equal scores keep their input order.
pub fn nms<S, D>(detections: &[D], iou_threshold: S) -> Result<Vec<D>, MathError>
where
    S: Scalar,
    D: Detection<S> + Clone,
{
    if !(iou_threshold > S::zero() && iou_threshold <= S::one()) {
        return Err(MathError::BadThreshold(iou_threshold.to_f64_lossy()));
    }

    let mut order: Vec<usize> = (0..detections.len()).collect();
    // stable: ties stay in input order
    order.sort_by(|&a, &b| {
        detections[b]
            .score()
            .partial_cmp(&detections[a].score())
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut suppressed = vec![false; detections.len()];
    let mut kept = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if suppressed[i] {
            continue;
        }
        kept.push(detections[i].clone());
        let head = detections[i].bbox();
        for &j in &order[pos + 1..] {
            if !suppressed[j] && iou(head, detections[j].bbox()) > iou_threshold {
                suppressed[j] = true;
            }
        }
    }
    Ok(kept)
}
