use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{presets, HarnessError, Scenario};
use crate::accounting::{realtime_check, RunLedger, SystemMetrics};
use crate::pipeline::{run_scenario_with, RoutingMode};

/// Metric names emitted per mode in CSV reports, in row order.
pub const CSV_METRICS: [&str; 9] = [
    "dtvr",
    "ecr",
    "accuracy",
    "breakdown_edge",
    "breakdown_comm",
    "breakdown_cloud",
    "realtime_ok",
    "bytes_up",
    "energy_j",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub mode: RoutingMode,
    pub ledger: RunLedger,
    pub metrics: SystemMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub mode: RoutingMode,
    pub dtvr: f64,
    pub ecr: f64,
    pub accuracy: Option<f64>,
    /// Accuracy minus the all-cloud baseline's accuracy.
    pub accuracy_delta: Option<f64>,
    pub realtime_ok: bool,
}

/// Results of one scenario under each requested mode. Contains no
/// timestamps, so identical inputs give identical reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub scenario: String,
    pub config_digest: String,
    pub seed: u64,
    pub frame_count: u64,
    pub runs: Vec<ModeReport>,
    pub comparison: Vec<ComparisonRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ReportFormat {
    /// `Csv` for a `.csv` extension, `Json` otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => ReportFormat::Csv,
            _ => ReportFormat::Json,
        }
    }
}

fn ledger_for(scenario: &Scenario, mode: RoutingMode) -> Result<RunLedger, HarnessError> {
    let results = run_scenario_with(scenario, &scenario.policy.with_mode(mode))?;
    Ok(RunLedger::from_results(
        &results,
        &scenario.edge_platform,
        &scenario.cloud_platform,
        &scenario.channel,
        scenario.oracles.catalog.count(),
    ))
}

/// Runs each mode in `modes` on the same frame stream and compares it with
/// the all-cloud baseline, which is always simulated.
pub fn run(scenario: &Scenario, modes: &BTreeSet<RoutingMode>) -> Result<Report, HarnessError> {
    let mut needed = modes.clone();
    needed.insert(RoutingMode::AllCloud);

    let ledgers: BTreeMap<RoutingMode, RunLedger> = std::thread::scope(|s| {
        let handles: Vec<_> = needed
            .iter()
            .map(|&mode| (mode, s.spawn(move || ledger_for(scenario, mode))))
            .collect();
        handles
            .into_iter()
            .map(|(mode, h)| Ok((mode, h.join().expect("mode worker panicked")?)))
            .collect::<Result<_, HarnessError>>()
    })?;

    let baseline = &ledgers[&RoutingMode::AllCloud];
    let bound = presets::realtime_bound_ms();
    let mut runs = Vec::with_capacity(modes.len());
    let mut comparison = Vec::with_capacity(modes.len());
    for &mode in modes {
        let ledger = ledgers[&mode].clone();
        let front = match mode {
            RoutingMode::AllCloud => &scenario.cloud_platform,
            _ => &scenario.edge_platform,
        };
        let metrics = SystemMetrics::compute(&ledger, baseline, realtime_check(front, bound))?;
        comparison.push(ComparisonRow {
            mode,
            dtvr: metrics.dtvr,
            ecr: metrics.ecr,
            accuracy: metrics.accuracy,
            accuracy_delta: metrics.accuracy.zip(baseline.accuracy()).map(|(a, b)| a - b),
            realtime_ok: metrics.realtime_ok,
        });
        runs.push(ModeReport {
            mode,
            ledger,
            metrics,
        });
    }
    Ok(Report {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        scenario: scenario.config.name.clone(),
        config_digest: scenario.config.digest(),
        seed: scenario.seed(),
        frame_count: scenario.frame_count(),
        runs,
        comparison,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// `mode,metric,value` rows, one per mode and entry of [`CSV_METRICS`].
    /// Undefined values are left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mode,metric,value\n");
        for r in &self.runs {
            let m = &r.metrics;
            let b = m.breakdown;
            let values = [
                m.dtvr.to_string(),
                m.ecr.to_string(),
                opt(m.accuracy),
                opt(b.map(|b| b.edge)),
                opt(b.map(|b| b.comm)),
                opt(b.map(|b| b.cloud)),
                m.realtime_ok.to_string(),
                r.ledger.bytes_up.to_string(),
                r.ledger.total_energy_j().to_string(),
            ];
            for (metric, value) in CSV_METRICS.iter().zip(values) {
                writeln!(out, "{},{metric},{value}", r.mode.as_str()).expect("string write");
            }
        }
        out
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Csv => self.to_csv(),
        }
    }
}

pub fn emit(report: &Report, format: ReportFormat, path: &Path) -> Result<(), HarnessError> {
    std::fs::write(path, report.render(format)).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}
