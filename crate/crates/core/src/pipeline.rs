//! Per-frame routing: localize, suppress duplicates, score difficulty, and
//! classify each proposal on the edge or in the cloud.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{validate_frame, ClassCatalog, DomainError, Frame, Proposal};
use crate::harness::Scenario;
use crate::modelmath::{nms, MathError};
use crate::oracles::{
    assign_difficulty, classify, classify_conditioned, estimate_difficulty, localize,
    ConfusionMatrix, DifficultyModel, LocalizerModel, OracleError, SeededRng, StreamKind,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("{component} has {got} classes but the catalog has {expected}")]
    CatalogMismatch {
        component: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("frame {index}: {source}")]
    Frame {
        index: u64,
        #[source]
        source: DomainError,
    },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Math(#[from] MathError),
    #[error("routing policy: {0}")]
    BadPolicy(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoutingMode {
    /// Difficulty-based split between edge and cloud.
    Collaborative,
    /// Everything classified on the edge; nothing transmitted.
    AllEdge,
    /// Centralized baseline: whole frames uploaded, all inference in the cloud.
    AllCloud,
}

impl RoutingMode {
    pub const ALL: [RoutingMode; 3] = [
        RoutingMode::Collaborative,
        RoutingMode::AllEdge,
        RoutingMode::AllCloud,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RoutingMode::Collaborative => "collaborative",
            RoutingMode::AllEdge => "all-edge",
            RoutingMode::AllCloud => "all-cloud",
        }
    }
}

impl std::str::FromStr for RoutingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RoutingMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode `{s}` (expected collaborative, all-edge, all-cloud)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingPolicy {
    /// Proposals scoring at or above `tau` go to the cloud.
    pub tau: f64,
    pub nms_iou: f64,
    pub mode: RoutingMode,
}

impl RoutingPolicy {
    /// Returns the offending field name and reason.
    pub fn check(&self) -> Result<(), (&'static str, String)> {
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(("tau", format!("{} is not in [0, 1]", self.tau)));
        }
        if !(self.nms_iou > 0.0 && self.nms_iou <= 1.0) {
            return Err(("nms_iou", format!("{} is not in (0, 1]", self.nms_iou)));
        }
        Ok(())
    }

    pub fn with_mode(&self, mode: RoutingMode) -> Self {
        Self { mode, ..self.clone() }
    }
}

/// The stochastic models a frame is processed with.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSet {
    pub catalog: ClassCatalog,
    pub edge_confusion: ConfusionMatrix,
    pub cloud_confusion: ConfusionMatrix,
    pub difficulty: DifficultyModel,
    pub localizer: LocalizerModel,
    pub bytes_per_pixel: f64,
    pub result_metadata_bytes: u64,
}

impl OracleSet {
    pub fn check_catalogs(&self) -> Result<(), PipelineError> {
        let expected = self.catalog.count();
        for (component, cm) in [
            ("edge confusion matrix", &self.edge_confusion),
            ("cloud confusion matrix", &self.cloud_confusion),
        ] {
            if cm.classes() != expected {
                return Err(PipelineError::CatalogMismatch {
                    component,
                    expected,
                    got: cm.classes(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Edge,
    Cloud,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalEvent {
    pub proposal: Proposal,
    pub difficulty_score: f64,
    pub is_hard: bool,
    pub routed_to: Route,
    pub predicted_class: usize,
    pub correct: bool,
    /// Upstream bytes attributed to this proposal.
    pub bytes_tx: u64,
    /// Result bytes returned from the cloud.
    pub bytes_rx: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameResult {
    pub frame_id: u64,
    /// Whole-frame upload (centralized mode only).
    pub frame_bytes_tx: u64,
    pub events: Vec<ProposalEvent>,
    pub edge_inferences: u64,
    pub cloud_inferences: u64,
}

impl FrameResult {
    pub fn bytes_up(&self) -> u64 {
        self.frame_bytes_tx + self.events.iter().map(|e| e.bytes_tx).sum::<u64>()
    }

    pub fn bytes_down(&self) -> u64 {
        self.events.iter().map(|e| e.bytes_rx).sum()
    }
}

/// Runs one frame through the pipeline.
///
/// Every proposal consumes the same random draws whatever the policy, so
/// runs that differ only in `tau` or `mode` see identical difficulty
/// scores and classifier outcomes.
pub fn process_frame(
    frame: &Frame,
    policy: &RoutingPolicy,
    oracles: &OracleSet,
    rng: &mut SeededRng,
) -> Result<FrameResult, PipelineError> {
    oracles.check_catalogs()?;
    policy
        .check()
        .map_err(|(field, reason)| PipelineError::BadPolicy(format!("{field}: {reason}")))?;

    let raw = localize(frame, &oracles.localizer, oracles.bytes_per_pixel, rng)?;
    let proposals = nms(&raw, policy.nms_iou)?;
    let meta = oracles.result_metadata_bytes;

    let mut result = FrameResult {
        frame_id: frame.frame_id,
        frame_bytes_tx: if policy.mode == RoutingMode::AllCloud {
            frame.bytes
        } else {
            0
        },
        events: Vec::with_capacity(proposals.len()),
        edge_inferences: 0,
        cloud_inferences: 0,
    };

    for proposal in proposals {
        let draw = assign_difficulty(&proposal, &oracles.difficulty, rng);
        let score = estimate_difficulty(draw.is_hard, &oracles.difficulty, rng);
        let edge_guess = classify_conditioned(
            proposal.true_class(),
            draw.edge_would_be_correct,
            &oracles.edge_confusion,
            rng,
        )?;
        let cloud_guess = classify(proposal.true_class(), &oracles.cloud_confusion, rng)?;

        let (routed_to, bytes_tx) = match policy.mode {
            RoutingMode::AllEdge => (Route::Edge, 0),
            RoutingMode::AllCloud => (Route::Cloud, meta),
            RoutingMode::Collaborative if score >= policy.tau => {
                (Route::Cloud, proposal.crop_bytes() + meta)
            }
            RoutingMode::Collaborative => (Route::Edge, 0),
        };
        let (predicted_class, bytes_rx) = match routed_to {
            Route::Edge => {
                result.edge_inferences += 1;
                (edge_guess, 0)
            }
            Route::Cloud => {
                result.cloud_inferences += 1;
                (cloud_guess, meta)
            }
        };
        result.events.push(ProposalEvent {
            correct: predicted_class == proposal.true_class(),
            proposal,
            difficulty_score: score,
            is_hard: draw.is_hard,
            routed_to,
            predicted_class,
            bytes_tx,
            bytes_rx,
        });
    }
    Ok(result)
}

/// Processes every frame of the scenario with its configured policy.
pub fn run_scenario(scenario: &Scenario) -> Result<Vec<FrameResult>, PipelineError> {
    run_scenario_with(scenario, &scenario.policy)
}

/// Processes every frame with `policy`. Frame `i` is synthesized from
/// substream `(seed, Frames, i)` and processed with `(seed, Processing, i)`,
/// so different policies see the same frames and the same draws.
pub fn run_scenario_with(
    scenario: &Scenario,
    policy: &RoutingPolicy,
) -> Result<Vec<FrameResult>, PipelineError> {
    scenario.oracles.check_catalogs()?;
    (0..scenario.frame_count())
        .map(|i| {
            let frame = scenario.frame(i)?;
            validate_frame(&frame, &scenario.oracles.catalog)
                .map_err(|source| PipelineError::Frame { index: i, source })?;
            let mut rng = SeededRng::substream(scenario.seed(), StreamKind::Processing, i);
            process_frame(&frame, policy, &scenario.oracles, &mut rng)
        })
        .collect()
}
