use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_probability, OracleError, SeededRng};
use crate::domain::Proposal;

/// Threshold at which `tpr` and `fpr` are defined.
pub const FLAG_THRESHOLD: f64 = 0.5;

/// Hardness prior, edge accuracy per hardness class, and the estimator's
/// operating point at [`FLAG_THRESHOLD`].
///
/// A proposal is "hard" when the edge classifier gets it wrong, so the
/// stock presets use `p_edge_correct_hard = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultyModel {
    pub p_hard: f64,
    pub p_edge_correct_easy: f64,
    pub p_edge_correct_hard: f64,
    pub tpr: f64,
    pub fpr: f64,
}

impl DifficultyModel {
    pub fn validate(&self) -> Result<(), OracleError> {
        check_probability("p_hard", self.p_hard)?;
        check_probability("p_edge_correct_easy", self.p_edge_correct_easy)?;
        check_probability("p_edge_correct_hard", self.p_edge_correct_hard)?;
        check_probability("tpr", self.tpr)?;
        check_probability("fpr", self.fpr)
    }

    /// Probability that a proposal scores at or above `tau`, given its
    /// hardness.
    pub fn exceed_probability(&self, is_hard: bool, tau: f64) -> f64 {
        let flag = if is_hard { self.tpr } else { self.fpr };
        flag * upper_tail((tau - FLAG_THRESHOLD) / (1.0 - FLAG_THRESHOLD))
            + (1.0 - flag) * upper_tail(tau / FLAG_THRESHOLD)
    }

    /// Expected fraction of proposals routed to the cloud at threshold `tau`.
    pub fn route_probability(&self, tau: f64) -> f64 {
        self.p_hard * self.exceed_probability(true, tau)
            + (1.0 - self.p_hard) * self.exceed_probability(false, tau)
    }

    /// Expected edge accuracy over all proposals.
    pub fn edge_accuracy(&self) -> f64 {
        self.p_hard * self.p_edge_correct_hard + (1.0 - self.p_hard) * self.p_edge_correct_easy
    }
}

/// `P(B >= x)` for `B ~ Beta(2, 2)`, whose CDF is `3x^2 - 2x^3`.
fn upper_tail(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    1.0 - x * x * (3.0 - 2.0 * x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifficultyDraw {
    pub is_hard: bool,
    pub edge_would_be_correct: bool,
}

/// Draws hardness, then edge correctness conditioned on it. Consumes two
/// uniforms.
pub fn assign_difficulty(
    _proposal: &Proposal,
    m: &DifficultyModel,
    rng: &mut SeededRng,
) -> DifficultyDraw {
    let is_hard = rng.random::<f64>() < m.p_hard;
    let p_correct = if is_hard {
        m.p_edge_correct_hard
    } else {
        m.p_edge_correct_easy
    };
    DifficultyDraw {
        is_hard,
        edge_would_be_correct: rng.random::<f64>() < p_correct,
    }
}

/// Estimated difficulty in `[0, 1)`.
///
/// The sample is flagged (score >= 0.5) with probability `tpr` when hard and
/// `fpr` when easy. Flagged scores are `0.5 + 0.5 B`, unflagged `0.5 B`,
/// with `B ~ Beta(2, 2)` drawn as the median of three uniforms, so every
/// call consumes exactly four uniforms.
pub fn estimate_difficulty(is_hard: bool, m: &DifficultyModel, rng: &mut SeededRng) -> f64 {
    let flag_rate = if is_hard { m.tpr } else { m.fpr };
    let flagged = rng.random::<f64>() < flag_rate;
    let mut u: [f64; 3] = [rng.random(), rng.random(), rng.random()];
    u.sort_by(|a, b| a.total_cmp(b));
    let b = u[1];
    if flagged {
        FLAG_THRESHOLD + (1.0 - FLAG_THRESHOLD) * b
    } else {
        FLAG_THRESHOLD * b
    }
}
