//! Core value types shared by the simulator: boxes, proposals, frames,
//! class catalogs, and platform/channel profiles.
//!
//! Every type validates on construction and on deserialization, so a value
//! that exists always satisfies its invariants.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Bytes per pixel of an uncompressed RGB crop.
pub const DEFAULT_BYTES_PER_PIXEL: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("degenerate box: x[{x_min}, {x_max}] y[{y_min}, {y_max}]")]
    DegenerateBox {
        x_min: f64,
        y_min: f64,
        x_max: f64,
        y_max: f64,
    },
    #[error("box coordinates must be finite and non-negative")]
    BadCoordinate,
    #[error("object {index} of frame {frame_id} lies outside the {width}x{height} frame")]
    OutOfBoundsBox {
        frame_id: u64,
        index: usize,
        width: u32,
        height: u32,
    },
    #[error("class index {class} out of range for a catalog of {count} classes")]
    BadClassIndex { class: usize, count: usize },
    #[error("objectness {0} is not in [0, 1]")]
    BadObjectness(f64),
    #[error("crop must contain at least one byte")]
    EmptyCrop,
    #[error("bytes per pixel must be finite and > 0, got {0}")]
    BadBytesPerPixel(f64),
    #[error("frame {0} has zero encoded bytes")]
    EmptyFrame(u64),
    #[error("class catalog: {0}")]
    BadCatalog(String),
    #[error("profile field `{field}` must be finite and > 0, got {value}")]
    BadProfile { field: &'static str, value: f64 },
}

/// Axis-aligned box in continuous frame coordinates (corner form).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBox<S>", bound = "S: Scalar")]
pub struct BoundingBox<S: Scalar = f64> {
    x_min: S,
    y_min: S,
    x_max: S,
    y_max: S,
}

#[derive(Deserialize)]
#[serde(bound = "S: Scalar")]
struct RawBox<S: Scalar> {
    x_min: S,
    y_min: S,
    x_max: S,
    y_max: S,
}

impl<S: Scalar> TryFrom<RawBox<S>> for BoundingBox<S> {
    type Error = DomainError;

    fn try_from(raw: RawBox<S>) -> Result<Self, Self::Error> {
        BoundingBox::new(raw.x_min, raw.y_min, raw.x_max, raw.y_max)
    }
}

impl<S: Scalar> BoundingBox<S> {
    pub fn new(x_min: S, y_min: S, x_max: S, y_max: S) -> Result<Self, DomainError> {
        let coords = [x_min, y_min, x_max, y_max];
        if coords.iter().any(|c| !c.is_finite() || *c < S::zero()) {
            return Err(DomainError::BadCoordinate);
        }
        if !(x_min < x_max && y_min < y_max) {
            return Err(DomainError::DegenerateBox {
                x_min: x_min.to_f64_lossy(),
                y_min: y_min.to_f64_lossy(),
                x_max: x_max.to_f64_lossy(),
                y_max: y_max.to_f64_lossy(),
            });
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    pub fn x_min(&self) -> S {
        self.x_min
    }
    pub fn y_min(&self) -> S {
        self.y_min
    }
    pub fn x_max(&self) -> S {
        self.x_max
    }
    pub fn y_max(&self) -> S {
        self.y_max
    }

    pub fn width(&self) -> S {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> S {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> S {
        self.width() * self.height()
    }

    /// Area of the overlap with `other`; zero when disjoint or touching.
    pub fn intersection_area(&self, other: &Self) -> S {
        let w = self.x_max.min(other.x_max) - self.x_min.max(other.x_min);
        let h = self.y_max.min(other.y_max) - self.y_min.max(other.y_min);
        if w <= S::zero() || h <= S::zero() {
            S::zero()
        } else {
            w * h
        }
    }

    /// True when the box lies inside `[0, width] x [0, height]`.
    pub fn fits_within(&self, width: S, height: S) -> bool {
        self.x_max <= width && self.y_max <= height
    }
}

/// Uncompressed crop size for a box: `ceil(area * bytes_per_pixel)`.
pub fn crop_bytes_for(bbox: &BoundingBox, bytes_per_pixel: f64) -> Result<u64, DomainError> {
    if !bytes_per_pixel.is_finite() || bytes_per_pixel <= 0.0 {
        return Err(DomainError::BadBytesPerPixel(bytes_per_pixel));
    }
    let bytes = (bbox.area() * bytes_per_pixel).ceil();
    if bytes < 1.0 {
        return Err(DomainError::EmptyCrop);
    }
    Ok(bytes as u64)
}

/// A detected (or ground-truth) object: the unit of routing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProposal")]
pub struct Proposal {
    bbox: BoundingBox,
    objectness: f64,
    true_class: usize,
    crop_bytes: u64,
}

#[derive(Deserialize)]
struct RawProposal {
    bbox: BoundingBox,
    objectness: f64,
    true_class: usize,
    crop_bytes: u64,
}

impl TryFrom<RawProposal> for Proposal {
    type Error = DomainError;

    fn try_from(raw: RawProposal) -> Result<Self, Self::Error> {
        if !(0.0..=1.0).contains(&raw.objectness) {
            return Err(DomainError::BadObjectness(raw.objectness));
        }
        if raw.crop_bytes == 0 {
            return Err(DomainError::EmptyCrop);
        }
        Ok(Self {
            bbox: raw.bbox,
            objectness: raw.objectness,
            true_class: raw.true_class,
            crop_bytes: raw.crop_bytes,
        })
    }
}

impl Proposal {
    /// Builds a proposal, deriving `crop_bytes` from the box area.
    pub fn new(
        bbox: BoundingBox,
        objectness: f64,
        true_class: usize,
        bytes_per_pixel: f64,
    ) -> Result<Self, DomainError> {
        let crop_bytes = crop_bytes_for(&bbox, bytes_per_pixel)?;
        RawProposal {
            bbox,
            objectness,
            true_class,
            crop_bytes,
        }
        .try_into()
    }

    pub fn bbox(&self) -> &BoundingBox {
        &self.bbox
    }
    pub fn objectness(&self) -> f64 {
        self.objectness
    }
    pub fn true_class(&self) -> usize {
        self.true_class
    }
    pub fn crop_bytes(&self) -> u64 {
        self.crop_bytes
    }
}

/// One sensor frame: size on the wire plus ground-truth annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub frame_id: u64,
    pub width: u32,
    pub height: u32,
    pub bytes: u64,
    pub objects: Vec<Proposal>,
}

/// Checks frame and object invariants against `catalog`.
pub fn validate_frame(frame: &Frame, catalog: &ClassCatalog) -> Result<(), DomainError> {
    if frame.bytes == 0 {
        return Err(DomainError::EmptyFrame(frame.frame_id));
    }
    let (w, h) = (f64::from(frame.width), f64::from(frame.height));
    for (index, object) in frame.objects.iter().enumerate() {
        if !object.bbox().fits_within(w, h) {
            return Err(DomainError::OutOfBoundsBox {
                frame_id: frame.frame_id,
                index,
                width: frame.width,
                height: frame.height,
            });
        }
        catalog.check_class(object.true_class())?;
    }
    Ok(())
}

/// Ordered category labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCatalog")]
pub struct ClassCatalog {
    names: Vec<String>,
}

#[derive(Deserialize)]
struct RawCatalog {
    names: Vec<String>,
}

impl TryFrom<RawCatalog> for ClassCatalog {
    type Error = DomainError;

    fn try_from(raw: RawCatalog) -> Result<Self, Self::Error> {
        ClassCatalog::new(raw.names)
    }
}

impl ClassCatalog {
    pub fn new<I, T>(names: I) -> Result<Self, DomainError>
    where
        I: IntoIterator<Item = T>,
        T: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() < 2 {
            return Err(DomainError::BadCatalog(format!(
                "need at least 2 classes, got {}",
                names.len()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(DomainError::BadCatalog(format!("duplicate class `{n}`")));
            }
        }
        Ok(Self { names })
    }

    /// SeaShips: six ship categories.
    pub fn seaships() -> Self {
        Self::new([
            "bulk cargo carrier",
            "container ship",
            "fishing boat",
            "general cargo ship",
            "ore carrier",
            "passenger ship",
        ])
        .expect("static catalog")
    }

    /// SMD-Plus: seven maritime categories.
    pub fn smd_plus() -> Self {
        Self::new([
            "ferry",
            "buoy",
            "vessel ship",
            "boat",
            "kayak",
            "sail boat",
            "others",
        ])
        .expect("static catalog")
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "seaships" => Some(Self::seaships()),
            "smd-plus" => Some(Self::smd_plus()),
            _ => None,
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn count(&self) -> usize {
        self.names.len()
    }

    pub fn check_class(&self, class: usize) -> Result<(), DomainError> {
        if class < self.count() {
            Ok(())
        } else {
            Err(DomainError::BadClassIndex {
                class,
                count: self.count(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlatformRole {
    Edge,
    Cloud,
}

/// Measured per-inference latency and power of one platform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPlatform")]
pub struct PlatformProfile {
    name: String,
    latency_ms: f64,
    power_w: f64,
    role: PlatformRole,
}

#[derive(Deserialize)]
struct RawPlatform {
    name: String,
    latency_ms: f64,
    power_w: f64,
    role: PlatformRole,
}

impl TryFrom<RawPlatform> for PlatformProfile {
    type Error = DomainError;

    fn try_from(raw: RawPlatform) -> Result<Self, Self::Error> {
        PlatformProfile::new(raw.name, raw.latency_ms, raw.power_w, raw.role)
    }
}

fn positive(field: &'static str, value: f64) -> Result<f64, DomainError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(DomainError::BadProfile { field, value })
    }
}

impl PlatformProfile {
    pub fn new(
        name: impl Into<String>,
        latency_ms: f64,
        power_w: f64,
        role: PlatformRole,
    ) -> Result<Self, DomainError> {
        Ok(Self {
            name: name.into(),
            latency_ms: positive("latency_ms", latency_ms)?,
            power_w: positive("power_w", power_w)?,
            role,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn latency_ms(&self) -> f64 {
        self.latency_ms
    }
    pub fn power_w(&self) -> f64 {
        self.power_w
    }
    pub fn role(&self) -> PlatformRole {
        self.role
    }

    /// Joules for one inference: power x latency.
    pub fn joules_per_inference(&self) -> f64 {
        self.power_w * self.latency_ms / 1000.0
    }
}

/// Uplink model between edge and cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChannel")]
pub struct ChannelProfile {
    bytes_per_second: f64,
    joules_per_byte: f64,
    result_metadata_bytes: u64,
}

#[derive(Deserialize)]
struct RawChannel {
    bytes_per_second: f64,
    joules_per_byte: f64,
    result_metadata_bytes: u64,
}

impl TryFrom<RawChannel> for ChannelProfile {
    type Error = DomainError;

    fn try_from(raw: RawChannel) -> Result<Self, Self::Error> {
        ChannelProfile::new(
            raw.bytes_per_second,
            raw.joules_per_byte,
            raw.result_metadata_bytes,
        )
    }
}

impl ChannelProfile {
    pub fn new(
        bytes_per_second: f64,
        joules_per_byte: f64,
        result_metadata_bytes: u64,
    ) -> Result<Self, DomainError> {
        if result_metadata_bytes == 0 {
            return Err(DomainError::BadProfile {
                field: "result_metadata_bytes",
                value: 0.0,
            });
        }
        Ok(Self {
            bytes_per_second: positive("bytes_per_second", bytes_per_second)?,
            joules_per_byte: positive("joules_per_byte", joules_per_byte)?,
            result_metadata_bytes,
        })
    }

    pub fn bytes_per_second(&self) -> f64 {
        self.bytes_per_second
    }
    pub fn joules_per_byte(&self) -> f64 {
        self.joules_per_byte
    }
    pub fn result_metadata_bytes(&self) -> u64 {
        self.result_metadata_bytes
    }

    pub fn with_joules_per_byte(&self, joules_per_byte: f64) -> Result<Self, DomainError> {
        Self::new(
            self.bytes_per_second,
            joules_per_byte,
            self.result_metadata_bytes,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(x0: f64, y0: f64, x1: f64, y1: f64) -> BoundingBox {
        BoundingBox::new(x0, y0, x1, y1).unwrap()
    }

    fn frame_with(objects: Vec<Proposal>) -> Frame {
        Frame {
            frame_id: 7,
            width: 640,
            height: 480,
            bytes: 640 * 480 * 3,
            objects,
        }
    }

    #[test]
    fn box_rejects_degenerate_and_negative() {
        assert!(matches!(
            BoundingBox::new(5.0, 0.0, 5.0, 10.0),
            Err(DomainError::DegenerateBox { .. })
        ));
        assert!(matches!(
            BoundingBox::new(0.0, 10.0, 5.0, 2.0),
            Err(DomainError::DegenerateBox { .. })
        ));
        assert_eq!(
            BoundingBox::new(-1.0, 0.0, 5.0, 2.0),
            Err(DomainError::BadCoordinate)
        );
        assert_eq!(
            BoundingBox::new(0.0, 0.0, f64::INFINITY, 2.0),
            Err(DomainError::BadCoordinate)
        );
    }

    #[test]
    fn frame_with_object_inside_is_ok() {
        let p = Proposal::new(bx(10.0, 10.0, 100.0, 80.0), 1.0, 2, 3.0).unwrap();
        assert_eq!(
            validate_frame(&frame_with(vec![p]), &ClassCatalog::seaships()),
            Ok(())
        );
    }

    #[test]
    fn frame_rejects_box_past_right_edge() {
        let p = Proposal::new(bx(600.0, 10.0, 700.0, 80.0), 1.0, 0, 3.0).unwrap();
        assert!(matches!(
            validate_frame(&frame_with(vec![p]), &ClassCatalog::seaships()),
            Err(DomainError::OutOfBoundsBox { index: 0, .. })
        ));
    }

    #[test]
    fn seaships_has_no_class_six() {
        let p = Proposal::new(bx(10.0, 10.0, 100.0, 80.0), 1.0, 6, 3.0).unwrap();
        assert_eq!(
            validate_frame(&frame_with(vec![p]), &ClassCatalog::seaships()),
            Err(DomainError::BadClassIndex { class: 6, count: 6 })
        );
        assert_eq!(ClassCatalog::smd_plus().count(), 7);
    }

    #[test]
    fn crop_bytes_is_ceiled_area() {
        let b = bx(0.0, 0.0, 10.5, 2.0);
        assert_eq!(crop_bytes_for(&b, 3.0).unwrap(), 63);
        let b = bx(0.0, 0.0, 0.1, 0.1);
        assert_eq!(crop_bytes_for(&b, 3.0).unwrap(), 1);
        assert!(crop_bytes_for(&b, 0.0).is_err());
    }

    #[test]
    fn catalog_rejects_duplicates_and_singletons() {
        assert!(ClassCatalog::new(["a"]).is_err());
        assert!(ClassCatalog::new(["a", "b", "a"]).is_err());
        assert!(ClassCatalog::preset("nope").is_none());
    }

    #[test]
    fn deserialization_enforces_invariants() {
        let bad_box = r#"{"x_min":3,"y_min":0,"x_max":1,"y_max":4}"#;
        assert!(serde_json::from_str::<BoundingBox>(bad_box).is_err());
        let bad_platform = r#"{"name":"x","latency_ms":0,"power_w":1,"role":"edge"}"#;
        assert!(serde_json::from_str::<PlatformProfile>(bad_platform).is_err());
        let bad_channel =
            r#"{"bytes_per_second":1e6,"joules_per_byte":-1,"result_metadata_bytes":64}"#;
        assert!(serde_json::from_str::<ChannelProfile>(bad_channel).is_err());
        let bad_prop = r#"{"bbox":{"x_min":0,"y_min":0,"x_max":1,"y_max":1},
            "objectness":1.5,"true_class":0,"crop_bytes":3}"#;
        assert!(serde_json::from_str::<Proposal>(bad_prop).is_err());
    }

    #[test]
    fn joules_per_inference_is_power_times_latency() {
        let tpu = PlatformProfile::new("TPU Dev", 9.0, 3.47, PlatformRole::Edge).unwrap();
        assert!((tpu.joules_per_inference() - 0.03123).abs() < 1e-12);
    }
}
