use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::scenario_from_value;
use super::{run, HarnessError, ScenarioConfig};
use crate::accounting::SystemMetrics;
use crate::pipeline::RoutingMode;

/// Inclusive arithmetic grid written `start:stop:step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step).round() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Points are `start + i * step`; the last one is snapped to `stop`.
    pub fn points(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.stop
                } else {
                    self.start + i as f64 * self.step
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |reason: &str| HarnessError::validation("grid", format!("`{s}`: {reason}"));
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(bad("expected start:stop:step"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("not a number"));
        let g = Grid {
            start: num(start)?,
            stop: num(stop)?,
            step: num(step)?,
        };
        if !(g.start.is_finite() && g.stop.is_finite() && g.step.is_finite()) {
            return Err(bad("values must be finite"));
        }
        if g.step <= 0.0 || g.stop < g.start {
            return Err(bad("need step > 0 and stop >= start"));
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub bytes_up: u64,
    pub edge_inferences: u64,
    pub cloud_inferences: u64,
    pub metrics: SystemMetrics,
}

fn pointer(param: &str) -> String {
    param.split('.').fold(String::new(), |mut p, seg| {
        p.push('/');
        p.push_str(seg);
        p
    })
}

/// Runs the collaborative mode once per grid value of the dotted config
/// path `param` (for example `routing.tau`).
pub fn sweep(
    config: &ScenarioConfig,
    param: &str,
    grid: &Grid,
) -> Result<Vec<SweepPoint>, HarnessError> {
    let base = serde_json::to_value(config).expect("config serializes");
    let ptr = pointer(param);
    match base.pointer(&ptr) {
        Some(v) if v.is_number() => {}
        Some(_) => return Err(HarnessError::validation(param, "not a numeric parameter")),
        None => return Err(HarnessError::validation(param, "no such parameter")),
    }
    let modes = BTreeSet::from([RoutingMode::Collaborative]);
    grid.points()
        .into_iter()
        .map(|value| {
            let mut doc = base.clone();
            *doc.pointer_mut(&ptr).expect("checked above") = value.into();
            let mut scenario = scenario_from_value(doc)?;
            scenario.policy.mode = RoutingMode::Collaborative;
            let report = run(&scenario, &modes)?;
            let run = report.runs.into_iter().next().expect("one mode requested");
            Ok(SweepPoint {
                value,
                bytes_up: run.ledger.bytes_up,
                edge_inferences: run.ledger.edge_inferences,
                cloud_inferences: run.ledger.cloud_inferences,
                metrics: run.metrics,
            })
        })
        .collect()
}

pub fn sweep_csv(param: &str, points: &[SweepPoint]) -> String {
    let mut out = format!(
        "{param},bytes_up,edge_inferences,cloud_inferences,dtvr,ecr,accuracy\n"
    );
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.value,
            p.bytes_up,
            p.edge_inferences,
            p.cloud_inferences,
            p.metrics.dtvr,
            p.metrics.ecr,
            p.metrics.accuracy.map(|a| a.to_string()).unwrap_or_default()
        )
        .expect("string write");
    }
    out
}
