//! Energy, bandwidth, and latency bookkeeping.
//!
//! Energy per inference is steady-state power times latency; transmission
//! energy is linear in upstream bytes. Ratios compare a run against the
//! centralized baseline that uploads whole frames and does no edge work.

use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{ChannelProfile, PlatformProfile};
use crate::pipeline::{FrameResult, Route};

/// Front-end latency budget for real-time operation, in milliseconds.
pub const REALTIME_BOUND_MS: f64 = 66.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AccountingError {
    #[error("baseline {0} is zero")]
    DivisionByZeroBaseline(&'static str),
    #[error("ledger has zero total energy")]
    ZeroTotalEnergy,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergySplit {
    pub edge_j: f64,
    pub comm_j: f64,
    pub cloud_j: f64,
}

impl EnergySplit {
    pub fn total(&self) -> f64 {
        self.edge_j + self.comm_j + self.cloud_j
    }
}

/// Joules spent on edge inference, transmission, and cloud inference.
pub fn energy_of(
    results: &[FrameResult],
    edge: &PlatformProfile,
    cloud: &PlatformProfile,
    channel: &ChannelProfile,
) -> EnergySplit {
    let edge_n: u64 = results.iter().map(|r| r.edge_inferences).sum();
    let cloud_n: u64 = results.iter().map(|r| r.cloud_inferences).sum();
    let bytes_up: u64 = results.iter().map(FrameResult::bytes_up).sum();
    EnergySplit {
        edge_j: edge_n as f64 * edge.joules_per_inference(),
        comm_j: bytes_up as f64 * channel.joules_per_byte(),
        cloud_j: cloud_n as f64 * cloud.joules_per_inference(),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassTally {
    pub correct: u64,
    pub incorrect: u64,
}

/// Totals for one run. Ledgers add component-wise, so a run split into
/// pieces sums back to the whole.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunLedger {
    pub frames: u64,
    pub proposals: u64,
    pub edge_inferences: u64,
    pub cloud_inferences: u64,
    pub bytes_up: u64,
    pub bytes_down: u64,
    pub edge_energy_j: f64,
    pub comm_energy_j: f64,
    pub cloud_energy_j: f64,
    pub edge_latency_ms: f64,
    pub comm_latency_ms: f64,
    pub cloud_latency_ms: f64,
    pub per_class: Vec<ClassTally>,
}

impl RunLedger {
    pub fn from_results(
        results: &[FrameResult],
        edge: &PlatformProfile,
        cloud: &PlatformProfile,
        channel: &ChannelProfile,
        classes: usize,
    ) -> Self {
        let energy = energy_of(results, edge, cloud, channel);
        let mut ledger = RunLedger {
            frames: results.len() as u64,
            edge_energy_j: energy.edge_j,
            comm_energy_j: energy.comm_j,
            cloud_energy_j: energy.cloud_j,
            per_class: vec![ClassTally::default(); classes],
            ..Default::default()
        };
        for r in results {
            ledger.proposals += r.events.len() as u64;
            ledger.edge_inferences += r.edge_inferences;
            ledger.cloud_inferences += r.cloud_inferences;
            ledger.bytes_up += r.bytes_up();
            ledger.bytes_down += r.bytes_down();
            for e in &r.events {
                let tally = &mut ledger.per_class[e.proposal.true_class()];
                if e.correct {
                    tally.correct += 1;
                } else {
                    tally.incorrect += 1;
                }
            }
        }
        ledger.edge_latency_ms = ledger.edge_inferences as f64 * edge.latency_ms();
        ledger.cloud_latency_ms = ledger.cloud_inferences as f64 * cloud.latency_ms();
        ledger.comm_latency_ms =
            (ledger.bytes_up + ledger.bytes_down) as f64 / channel.bytes_per_second() * 1000.0;
        ledger
    }

    pub fn energy(&self) -> EnergySplit {
        EnergySplit {
            edge_j: self.edge_energy_j,
            comm_j: self.comm_energy_j,
            cloud_j: self.cloud_energy_j,
        }
    }

    pub fn total_energy_j(&self) -> f64 {
        self.energy().total()
    }

    pub fn correct(&self) -> u64 {
        self.per_class.iter().map(|t| t.correct).sum()
    }

    /// Fraction of proposals classified correctly; `None` with no proposals.
    pub fn accuracy(&self) -> Option<f64> {
        (self.proposals > 0).then(|| self.correct() as f64 / self.proposals as f64)
    }

    pub fn edge_latency_ms_per_frame(&self) -> f64 {
        if self.frames == 0 {
            0.0
        } else {
            self.edge_latency_ms / self.frames as f64
        }
    }
}

impl AddAssign<&RunLedger> for RunLedger {
    fn add_assign(&mut self, other: &RunLedger) {
        self.frames += other.frames;
        self.proposals += other.proposals;
        self.edge_inferences += other.edge_inferences;
        self.cloud_inferences += other.cloud_inferences;
        self.bytes_up += other.bytes_up;
        self.bytes_down += other.bytes_down;
        self.edge_energy_j += other.edge_energy_j;
        self.comm_energy_j += other.comm_energy_j;
        self.cloud_energy_j += other.cloud_energy_j;
        self.edge_latency_ms += other.edge_latency_ms;
        self.comm_latency_ms += other.comm_latency_ms;
        self.cloud_latency_ms += other.cloud_latency_ms;
        if self.per_class.len() < other.per_class.len() {
            self.per_class.resize(other.per_class.len(), ClassTally::default());
        }
        for (mine, theirs) in self.per_class.iter_mut().zip(&other.per_class) {
            mine.correct += theirs.correct;
            mine.incorrect += theirs.incorrect;
        }
    }
}

impl Add<&RunLedger> for RunLedger {
    type Output = RunLedger;

    fn add(mut self, other: &RunLedger) -> RunLedger {
        self += other;
        self
    }
}

/// Data transmission volume ratio: upstream bytes relative to the baseline.
pub fn dtvr(ours: &RunLedger, centralized: &RunLedger) -> Result<f64, AccountingError> {
    if centralized.bytes_up == 0 {
        return Err(AccountingError::DivisionByZeroBaseline("bytes_up"));
    }
    Ok(ours.bytes_up as f64 / centralized.bytes_up as f64)
}

/// Energy consumption ratio relative to the baseline.
pub fn ecr(ours: &RunLedger, centralized: &RunLedger) -> Result<f64, AccountingError> {
    let base = centralized.total_energy_j();
    if base <= 0.0 {
        return Err(AccountingError::DivisionByZeroBaseline("total energy"));
    }
    Ok(ours.total_energy_j() / base)
}

/// Normalized `(edge, comm, cloud)` shares of a ledger's energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub edge: f64,
    pub comm: f64,
    pub cloud: f64,
}

pub fn breakdown(ledger: &RunLedger) -> Result<EnergyBreakdown, AccountingError> {
    let total = ledger.total_energy_j();
    if total.is_nan() || total <= 0.0 {
        return Err(AccountingError::ZeroTotalEnergy);
    }
    Ok(EnergyBreakdown {
        edge: ledger.edge_energy_j / total,
        comm: ledger.comm_energy_j / total,
        cloud: ledger.cloud_energy_j / total,
    })
}

/// True when one inference on `profile` fits within `bound_ms`.
pub fn realtime_check(profile: &PlatformProfile, bound_ms: f64) -> bool {
    profile.latency_ms() < bound_ms
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemMetrics {
    pub dtvr: f64,
    pub ecr: f64,
    pub accuracy: Option<f64>,
    pub breakdown: Option<EnergyBreakdown>,
    pub realtime_ok: bool,
}

impl SystemMetrics {
    pub fn compute(
        ours: &RunLedger,
        centralized: &RunLedger,
        realtime_ok: bool,
    ) -> Result<Self, AccountingError> {
        Ok(Self {
            dtvr: dtvr(ours, centralized)?,
            ecr: ecr(ours, centralized)?,
            accuracy: ours.accuracy(),
            breakdown: breakdown(ours).ok(),
            realtime_ok,
        })
    }
}

/// Upstream bytes of events routed to `route` (crop uploads and metadata).
pub fn routed_bytes(results: &[FrameResult], route: Route) -> u64 {
    results
        .iter()
        .flat_map(|r| &r.events)
        .filter(|e| e.routed_to == route)
        .map(|e| e.bytes_tx)
        .sum()
}
