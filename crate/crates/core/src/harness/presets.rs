//! Bundled data: the measured platform table, approximate confusion
//! matrices, and scenario presets.

use serde::Deserialize;

use super::HarnessError;
use crate::domain::{DomainError, PlatformProfile, PlatformRole};
use crate::oracles::ConfusionMatrix;

const PLATFORMS: &str = include_str!("../../presets/platforms.json");

const CONFUSION: &[(&str, &str)] = &[
    ("seaships-edge", include_str!("../../presets/confusion/seaships-edge.json")),
    ("seaships-cloud", include_str!("../../presets/confusion/seaships-cloud.json")),
    ("smd-plus-edge", include_str!("../../presets/confusion/smd-plus-edge.json")),
    ("smd-plus-cloud", include_str!("../../presets/confusion/smd-plus-cloud.json")),
];

const SCENARIOS: &[(&str, &str)] = &[
    ("seaships-default", include_str!("../../presets/scenarios/seaships-default.json")),
    ("smd-plus-default", include_str!("../../presets/scenarios/smd-plus-default.json")),
    ("seaships-calibrated", include_str!("../../presets/scenarios/seaships-calibrated.json")),
    ("smd-plus-calibrated", include_str!("../../presets/scenarios/smd-plus-calibrated.json")),
];

/// One column of the latency/power measurement table.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct PlatformRecord {
    pub name: String,
    pub latency_ms: f64,
    pub power_w: f64,
    pub role: PlatformRole,
    pub host: String,
    pub kernel: String,
    pub framework: String,
}

impl PlatformRecord {
    pub fn profile(&self) -> Result<PlatformProfile, DomainError> {
        PlatformProfile::new(self.name.clone(), self.latency_ms, self.power_w, self.role)
    }
}

#[derive(Deserialize)]
struct PlatformTable {
    bound_ms: f64,
    platforms: Vec<PlatformRecord>,
}

fn table() -> PlatformTable {
    serde_json::from_str(PLATFORMS).expect("bundled platform table parses")
}

/// All measured platforms, edge devices first, in table order.
pub fn platform_table() -> Vec<PlatformRecord> {
    table().platforms
}

/// Real-time bound shipped with the platform table.
pub fn realtime_bound_ms() -> f64 {
    table().bound_ms
}

pub fn platform(name: &str) -> Result<PlatformProfile, HarnessError> {
    platform_table()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| HarnessError::UnknownPreset {
            kind: "platform",
            name: name.to_string(),
        })?
        .profile()
        .map_err(|e| HarnessError::Parse(e.to_string()))
}

pub fn confusion(name: &str) -> Result<ConfusionMatrix, HarnessError> {
    let text = CONFUSION
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| HarnessError::UnknownPreset {
            kind: "confusion matrix",
            name: name.to_string(),
        })?;
    Ok(serde_json::from_str(text).expect("bundled confusion matrix parses"))
}

pub fn confusion_names() -> Vec<&'static str> {
    CONFUSION.iter().map(|(n, _)| *n).collect()
}

/// Raw JSON text of a bundled scenario.
pub fn scenario_text(name: &str) -> Result<&'static str, HarnessError> {
    SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| HarnessError::UnknownPreset {
            kind: "scenario",
            name: name.to_string(),
        })
}

pub fn scenario_names() -> Vec<&'static str> {
    SCENARIOS.iter().map(|(n, _)| *n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_has_ten_valid_platforms() {
        let t = platform_table();
        assert_eq!(t.len(), 10);
        assert!(t.iter().all(|p| p.profile().is_ok()));
        assert_eq!(t.iter().filter(|p| p.role == PlatformRole::Cloud).count(), 2);
        assert_eq!(realtime_bound_ms(), 66.0);
    }

    #[test]
    fn lookups() {
        let tpu = platform("TPU Dev").unwrap();
        assert_eq!((tpu.latency_ms(), tpu.power_w()), (9.0, 3.47));
        let alveo = platform("Alveo U200").unwrap();
        assert_eq!((alveo.latency_ms(), alveo.power_w()), (16.8, 17.8));
        assert!(matches!(platform("TPU Max"), Err(HarnessError::UnknownPreset { .. })));
        for name in confusion_names() {
            confusion(name).unwrap();
        }
        assert!(confusion("coco").is_err());
    }

    #[test]
    fn preset_matrices_meet_stated_accuracy_counts() {
        let above = |name: &str| {
            confusion(name)
                .unwrap()
                .diagonal()
                .into_iter()
                .filter(|&d| d > 0.95)
                .count()
        };
        assert_eq!(above("seaships-cloud"), 3);
        assert_eq!(above("smd-plus-cloud"), 4);
        assert_eq!(confusion("seaships-edge").unwrap().classes(), 6);
        assert_eq!(confusion("smd-plus-edge").unwrap().classes(), 7);
    }
}
