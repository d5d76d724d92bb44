use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use super::{check_probability, OracleError, SeededRng};
use crate::domain::{BoundingBox, DomainError, Frame, Proposal};

/// Largest relative edge shift of a duplicate proposal. Keeps every
/// duplicate's IoU with its source above 2/3.
const DUPLICATE_SHIFT: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizerModel {
    /// Probability that a ground-truth object yields a proposal.
    pub recall: f64,
    /// Mean number of extra overlapping proposals per detected object.
    pub duplicate_rate: f64,
    /// Standard deviation of per-corner positional noise, in pixels.
    pub jitter_px: f64,
}

impl LocalizerModel {
    pub fn validate(&self) -> Result<(), OracleError> {
        check_probability("recall", self.recall)?;
        for (field, value) in [
            ("duplicate_rate", self.duplicate_rate),
            ("jitter_px", self.jitter_px),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(OracleError::BadParameter {
                    field,
                    value,
                    range: "[0, inf)",
                });
            }
        }
        Ok(())
    }

    pub fn noiseless() -> Self {
        Self {
            recall: 1.0,
            duplicate_rate: 0.0,
            jitter_px: 0.0,
        }
    }
}

fn clamped_box(
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    width: f64,
    height: f64,
    fallback: &BoundingBox,
) -> BoundingBox {
    BoundingBox::new(
        x0.clamp(0.0, width),
        y0.clamp(0.0, height),
        x1.clamp(0.0, width),
        y1.clamp(0.0, height),
    )
    .unwrap_or(*fallback)
}

/// Simulated proposals for `frame`, before NMS.
///
/// Each object is detected with probability `recall`; a detection is the
/// ground-truth box with Gaussian corner jitter and objectness in
/// `[0.5, 1)`, followed by `Poisson(duplicate_rate)` shifted duplicates with
/// strictly lower objectness.
pub fn localize(
    frame: &Frame,
    m: &LocalizerModel,
    bytes_per_pixel: f64,
    rng: &mut SeededRng,
) -> Result<Vec<Proposal>, DomainError> {
    let (fw, fh) = (f64::from(frame.width), f64::from(frame.height));
    let jitter = Normal::new(0.0, m.jitter_px).expect("validated jitter");
    let duplicates = (m.duplicate_rate > 0.0)
        .then(|| Poisson::new(m.duplicate_rate).expect("validated duplicate rate"));

    let mut out = Vec::new();
    for object in &frame.objects {
        if rng.random::<f64>() >= m.recall {
            continue;
        }
        let gt = object.bbox();
        let mut noise = [0.0; 4];
        for n in &mut noise {
            *n = jitter.sample(rng);
        }
        let primary = clamped_box(
            gt.x_min() + noise[0],
            gt.y_min() + noise[1],
            gt.x_max() + noise[2],
            gt.y_max() + noise[3],
            fw,
            fh,
            gt,
        );
        let objectness = rng.random_range(0.5..1.0);
        out.push(Proposal::new(
            primary,
            objectness,
            object.true_class(),
            bytes_per_pixel,
        )?);

        let extra = duplicates.map_or(0, |d| d.sample(rng) as u64);
        for _ in 0..extra {
            let (w, h) = (primary.width(), primary.height());
            let mut shift = [0.0; 4];
            for s in &mut shift {
                *s = rng.random_range(-DUPLICATE_SHIFT..DUPLICATE_SHIFT);
            }
            let dup = clamped_box(
                primary.x_min() + shift[0] * w,
                primary.y_min() + shift[1] * h,
                primary.x_max() + shift[2] * w,
                primary.y_max() + shift[3] * h,
                fw,
                fh,
                &primary,
            );
            let score = objectness * rng.random_range(0.5..0.95);
            out.push(Proposal::new(
                dup,
                score,
                object.true_class(),
                bytes_per_pixel,
            )?);
        }
    }
    Ok(out)
}
