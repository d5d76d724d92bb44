use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{presets, CalibrationTarget, HarnessError};
use crate::domain::{
    BoundingBox, ChannelProfile, ClassCatalog, DomainError, Frame, PlatformProfile, PlatformRole,
    Proposal,
};
use crate::modelmath::iou;
use crate::oracles::{
    ConfusionMatrix, DifficultyModel, LocalizerModel, OracleError, SeededRng, StreamKind,
};
use crate::pipeline::{OracleSet, RoutingPolicy};

/// Placement attempts before an object is accepted despite overlap.
const PLACEMENT_ATTEMPTS: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSpec {
    pub width: u32,
    pub height: u32,
    pub bytes_per_pixel: f64,
    /// Encoded frame size; defaults to `ceil(width * height * bytes_per_pixel)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bytes: Option<u64>,
}

impl FrameSpec {
    pub fn frame_bytes(&self) -> u64 {
        self.bytes.unwrap_or_else(|| {
            (f64::from(self.width) * f64::from(self.height) * self.bytes_per_pixel).ceil() as u64
        })
    }
}

/// Inclusive uniform integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountRange {
    pub min: u32,
    pub max: u32,
}

impl CountRange {
    pub fn mean(&self) -> f64 {
        (f64::from(self.min) + f64::from(self.max)) / 2.0
    }
}

/// Object box sizes: width and height uniform in their ranges, then both
/// multiplied by `scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CropSpec {
    pub width_min: f64,
    pub width_max: f64,
    pub height_min: f64,
    pub height_max: f64,
    pub scale: f64,
    /// Objects are re-placed while their IoU with an earlier object exceeds this.
    pub max_overlap_iou: f64,
}

impl CropSpec {
    pub fn mean_width(&self) -> f64 {
        (self.width_min + self.width_max) / 2.0 * self.scale
    }

    pub fn mean_height(&self) -> f64 {
        (self.height_min + self.height_max) / 2.0 * self.scale
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixRef {
    Preset(String),
    Inline { rows: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlinePlatform {
    pub name: String,
    pub latency_ms: f64,
    pub power_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlatformRef {
    Preset(String),
    Inline(InlinePlatform),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformPair {
    pub edge: PlatformRef,
    pub cloud: PlatformRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub bytes_per_second: f64,
    pub joules_per_byte: f64,
    pub result_metadata_bytes: u64,
}

/// A complete scenario as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: u64,
    pub frame_count: u64,
    pub frame: FrameSpec,
    pub objects_per_frame: CountRange,
    pub crops: CropSpec,
    pub catalog: String,
    pub edge_confusion: MatrixRef,
    pub cloud_confusion: MatrixRef,
    pub difficulty: DifficultyModel,
    pub localizer: LocalizerModel,
    pub routing: RoutingPolicy,
    pub platforms: PlatformPair,
    pub channel: ChannelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationTarget>,
}

impl ScenarioConfig {
    /// Canonical JSON: keys sorted, no insignificant whitespace.
    pub fn canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string(&value).expect("value serializes")
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }
}

/// A validated scenario with every preset resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub oracles: OracleSet,
    pub policy: RoutingPolicy,
    pub edge_platform: PlatformProfile,
    pub cloud_platform: PlatformProfile,
    pub channel: ChannelProfile,
}

fn oracle_field(prefix: &str, e: OracleError) -> HarnessError {
    match e {
        OracleError::BadParameter { field, .. } => {
            HarnessError::validation(format!("{prefix}.{field}"), e)
        }
        other => HarnessError::validation(prefix, other),
    }
}

fn resolve_matrix(
    field: &str,
    r: &MatrixRef,
    catalog: &ClassCatalog,
) -> Result<ConfusionMatrix, HarnessError> {
    let cm = match r {
        MatrixRef::Preset(name) => presets::confusion(name)?,
        MatrixRef::Inline { rows } => {
            ConfusionMatrix::new(rows.clone()).map_err(|e| HarnessError::validation(field, e))?
        }
    };
    if cm.classes() != catalog.count() {
        return Err(HarnessError::validation(
            field,
            format!(
                "{} classes but catalog has {}",
                cm.classes(),
                catalog.count()
            ),
        ));
    }
    Ok(cm)
}

fn resolve_platform(
    field: &str,
    r: &PlatformRef,
    role: PlatformRole,
) -> Result<PlatformProfile, HarnessError> {
    let profile = match r {
        PlatformRef::Preset(name) => presets::platform(name)?,
        PlatformRef::Inline(p) => PlatformProfile::new(p.name.clone(), p.latency_ms, p.power_w, role)
            .map_err(|e| match e {
                DomainError::BadProfile { field: f, .. } => {
                    HarnessError::validation(format!("{field}.{f}"), e)
                }
                other => HarnessError::validation(field, other),
            })?,
    };
    if profile.role() != role {
        return Err(HarnessError::validation(
            field,
            format!("`{}` is not a {role:?} platform", profile.name()),
        ));
    }
    Ok(profile)
}

fn check(cond: bool, field: &str, reason: &str) -> Result<(), HarnessError> {
    if cond {
        Ok(())
    } else {
        Err(HarnessError::validation(field, reason))
    }
}

impl Scenario {
    pub fn from_config(config: ScenarioConfig) -> Result<Self, HarnessError> {
        let f = &config.frame;
        check(f.width > 0, "frame.width", "must be > 0")?;
        check(f.height > 0, "frame.height", "must be > 0")?;
        check(
            f.bytes_per_pixel.is_finite() && f.bytes_per_pixel > 0.0,
            "frame.bytes_per_pixel",
            "must be finite and > 0",
        )?;
        check(f.frame_bytes() > 0, "frame.bytes", "must be > 0")?;

        let o = &config.objects_per_frame;
        check(o.min <= o.max, "objects_per_frame", "min must not exceed max")?;

        let c = &config.crops;
        let (fw, fh) = (f64::from(f.width), f64::from(f.height));
        check(
            c.width_min > 0.0 && c.width_min <= c.width_max,
            "crops.width_min",
            "need 0 < width_min <= width_max",
        )?;
        check(
            c.height_min > 0.0 && c.height_min <= c.height_max,
            "crops.height_min",
            "need 0 < height_min <= height_max",
        )?;
        check(c.scale.is_finite() && c.scale > 0.0, "crops.scale", "must be finite and > 0")?;
        check(
            c.width_max * c.scale <= fw && c.height_max * c.scale <= fh,
            "crops.scale",
            "scaled crops must fit inside the frame",
        )?;
        check(
            (0.0..=1.0).contains(&c.max_overlap_iou),
            "crops.max_overlap_iou",
            "must be in [0, 1]",
        )?;

        let catalog = ClassCatalog::preset(&config.catalog).ok_or_else(|| {
            HarnessError::UnknownPreset {
                kind: "catalog",
                name: config.catalog.clone(),
            }
        })?;
        let edge_confusion = resolve_matrix("edge_confusion", &config.edge_confusion, &catalog)?;
        let cloud_confusion = resolve_matrix("cloud_confusion", &config.cloud_confusion, &catalog)?;

        config
            .difficulty
            .validate()
            .map_err(|e| oracle_field("difficulty", e))?;
        config
            .localizer
            .validate()
            .map_err(|e| oracle_field("localizer", e))?;
        config
            .routing
            .check()
            .map_err(|(field, reason)| HarnessError::validation(format!("routing.{field}"), reason))?;

        let edge_platform =
            resolve_platform("platforms.edge", &config.platforms.edge, PlatformRole::Edge)?;
        let cloud_platform =
            resolve_platform("platforms.cloud", &config.platforms.cloud, PlatformRole::Cloud)?;

        let ch = &config.channel;
        let channel = ChannelProfile::new(ch.bytes_per_second, ch.joules_per_byte, ch.result_metadata_bytes)
            .map_err(|e| match e {
                DomainError::BadProfile { field, .. } => {
                    HarnessError::validation(format!("channel.{field}"), e)
                }
                other => HarnessError::validation("channel", other),
            })?;

        if let Some(t) = &config.calibration {
            t.validate()?;
        }

        Ok(Scenario {
            oracles: OracleSet {
                catalog,
                edge_confusion,
                cloud_confusion,
                difficulty: config.difficulty.clone(),
                localizer: config.localizer.clone(),
                bytes_per_pixel: f.bytes_per_pixel,
                result_metadata_bytes: ch.result_metadata_bytes,
            },
            policy: config.routing.clone(),
            edge_platform,
            cloud_platform,
            channel,
            config,
        })
    }

    /// Bundled scenario by name.
    pub fn preset(name: &str) -> Result<Self, HarnessError> {
        load_config_str(presets::scenario_text(name)?)
    }

    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn frame_count(&self) -> u64 {
        self.config.frame_count
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut s = self.clone();
        s.config.seed = seed;
        s
    }

    pub fn with_frame_count(&self, frame_count: u64) -> Self {
        let mut s = self.clone();
        s.config.frame_count = frame_count;
        s
    }

    /// Ground truth for frame `index`, drawn from its own substream.
    pub fn frame(&self, index: u64) -> Result<Frame, DomainError> {
        let cfg = &self.config;
        let mut rng = SeededRng::substream(cfg.seed, StreamKind::Frames, index);
        let (fw, fh) = (f64::from(cfg.frame.width), f64::from(cfg.frame.height));
        let range = cfg.objects_per_frame;
        let count = rng.random_range(range.min..=range.max);
        let c = &cfg.crops;
        let classes = self.oracles.catalog.count();

        let mut placed: Vec<BoundingBox> = Vec::with_capacity(count as usize);
        let mut objects = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let w = (c.width_min + rng.random::<f64>() * (c.width_max - c.width_min)) * c.scale;
            let h = (c.height_min + rng.random::<f64>() * (c.height_max - c.height_min)) * c.scale;
            let class = rng.random_range(0..classes);
            let mut candidate = None;
            for _ in 0..PLACEMENT_ATTEMPTS {
                let x = rng.random::<f64>() * (fw - w);
                let y = rng.random::<f64>() * (fh - h);
                let b = BoundingBox::new(x, y, (x + w).min(fw), (y + h).min(fh))?;
                candidate = Some(b);
                if placed.iter().all(|p| iou(p, &b) <= c.max_overlap_iou) {
                    break;
                }
            }
            let b = candidate.expect("at least one placement attempt");
            placed.push(b);
            objects.push(Proposal::new(b, 1.0, class, cfg.frame.bytes_per_pixel)?);
        }
        Ok(Frame {
            frame_id: index,
            width: cfg.frame.width,
            height: cfg.frame.height,
            bytes: cfg.frame.frame_bytes(),
            objects,
        })
    }
}

fn parse_value(value: serde_json::Value) -> Result<ScenarioConfig, HarnessError> {
    serde_json::from_value(value).map_err(|e| HarnessError::Parse(e.to_string()))
}

/// Parses and validates a scenario document.
pub fn load_config_str(text: &str) -> Result<Scenario, HarnessError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))?;
    Scenario::from_config(parse_value(value)?)
}

pub(crate) fn scenario_from_value(value: serde_json::Value) -> Result<Scenario, HarnessError> {
    Scenario::from_config(parse_value(value)?)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<Scenario, HarnessError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_config_str(&text)
}
