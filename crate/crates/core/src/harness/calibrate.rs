use serde::{Deserialize, Serialize};

use super::{HarnessError, Scenario, ScenarioConfig};

const BISECTION_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationTarget {
    pub target_dtvr: f64,
    pub target_ecr: f64,
}

impl CalibrationTarget {
    /// Rejects non-finite and non-positive targets. Values at or above 1 are
    /// well formed but unattainable, which [`calibrate`] reports separately.
    pub fn validate(&self) -> Result<(), HarnessError> {
        for (field, v) in [
            ("calibration.target_dtvr", self.target_dtvr),
            ("calibration.target_ecr", self.target_ecr),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(HarnessError::validation(field, format!("{v} must be in (0, 1)")));
            }
        }
        Ok(())
    }
}

/// Per-frame expectations of the collaborative run against the all-cloud
/// baseline, assuming duplicate proposals are fully suppressed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedMetrics {
    pub proposals_per_frame: f64,
    pub routed_fraction: f64,
    pub crop_bytes_mean: f64,
    pub dtvr: f64,
    pub ecr: f64,
}

/// Inputs of the analytic model that calibration does not touch.
struct Fixed {
    n: f64,
    meta: f64,
    baseline_bytes: f64,
    edge_j: f64,
    cloud_j: f64,
}

impl Fixed {
    fn of(s: &Scenario) -> Self {
        let c = &s.config;
        let n = c.objects_per_frame.mean() * c.localizer.recall;
        let meta = c.channel.result_metadata_bytes as f64;
        Fixed {
            n,
            meta,
            baseline_bytes: c.frame.frame_bytes() as f64 + n * meta,
            edge_j: s.edge_platform.joules_per_inference(),
            cloud_j: s.cloud_platform.joules_per_inference(),
        }
    }

    fn dtvr(&self, routed: f64, crop: f64) -> f64 {
        self.n * routed * (crop + self.meta) / self.baseline_bytes
    }

    /// Per-proposal compute energy of the collaborative run.
    fn compute_j(&self, routed: f64) -> f64 {
        (1.0 - routed) * self.edge_j + routed * self.cloud_j
    }
}

/// Mean crop size at `scale`; the half byte accounts for rounding up.
fn crop_bytes_mean(c: &ScenarioConfig, scale: f64) -> f64 {
    let w = (c.crops.width_min + c.crops.width_max) / 2.0;
    let h = (c.crops.height_min + c.crops.height_max) / 2.0;
    c.frame.bytes_per_pixel * w * h * scale * scale + 0.5
}

pub fn expected_metrics(s: &Scenario) -> ExpectedMetrics {
    let c = &s.config;
    let f = Fixed::of(s);
    let routed = c.difficulty.route_probability(c.routing.tau);
    let crop = crop_bytes_mean(c, c.crops.scale);
    let dtvr = f.dtvr(routed, crop);
    let jpb = c.channel.joules_per_byte;
    let ecr = (f.n * f.compute_j(routed) + jpb * dtvr * f.baseline_bytes)
        / (f.n * f.cloud_j + jpb * f.baseline_bytes);
    ExpectedMetrics {
        proposals_per_frame: f.n,
        routed_fraction: routed,
        crop_bytes_mean: crop,
        dtvr,
        ecr,
    }
}

fn unattainable(target: &'static str, value: f64, bound: String) -> HarnessError {
    HarnessError::Unattainable {
        target,
        value,
        bound,
    }
}

/// Largest crop scale that keeps boxes inside the frame and the expected
/// object area below the frame area.
fn max_scale(c: &ScenarioConfig) -> f64 {
    let (fw, fh) = (f64::from(c.frame.width), f64::from(c.frame.height));
    let w = (c.crops.width_min + c.crops.width_max) / 2.0;
    let h = (c.crops.height_min + c.crops.height_max) / 2.0;
    let density = (fw * fh / (c.objects_per_frame.mean().max(1.0) * w * h)).sqrt();
    (fw / c.crops.width_max)
        .min(fh / c.crops.height_max)
        .min(density)
}

/// Solves `p_hard`, then crop scale if `p_hard` leaves `[0, 1]`, for the DTVR
/// target; then `joules_per_byte` for the ECR target.
pub fn calibrate(target: CalibrationTarget, base: &Scenario) -> Result<ScenarioConfig, HarnessError> {
    target.validate()?;
    for (name, v) in [("dtvr", target.target_dtvr), ("ecr", target.target_ecr)] {
        if v >= 1.0 {
            return Err(unattainable(name, v, "targets must lie in (0, 1)".into()));
        }
    }
    let mut cfg = base.config.clone();
    let f = Fixed::of(base);
    if f.n <= 0.0 {
        return Err(unattainable(
            "dtvr",
            target.target_dtvr,
            "scenario yields no proposals".into(),
        ));
    }
    let d = target.target_dtvr;
    let tau = cfg.routing.tau;
    let q_hard = cfg.difficulty.exceed_probability(true, tau);
    let q_easy = cfg.difficulty.exceed_probability(false, tau);

    let crop = crop_bytes_mean(&cfg, cfg.crops.scale);
    let routed_needed = d * f.baseline_bytes / (f.n * (crop + f.meta));
    let p_hard = if q_hard != q_easy {
        (routed_needed - q_easy) / (q_hard - q_easy)
    } else {
        f64::NAN
    };

    if (0.0..=1.0).contains(&p_hard) {
        cfg.difficulty.p_hard = p_hard;
    } else {
        // Pin p_hard at the end of [0, 1] nearest the target and move crop
        // scale instead.
        let pinned = if (q_hard - routed_needed).abs() < (q_easy - routed_needed).abs() {
            1.0
        } else {
            0.0
        };
        cfg.difficulty.p_hard = pinned;
        let routed = cfg.difficulty.route_probability(tau);
        let at = |s: f64| f.dtvr(routed, crop_bytes_mean(&cfg, s));
        let (mut lo, mut hi) = (0.0, max_scale(&cfg));
        let (min, max) = (at(lo), at(hi));
        if !(min < d && d <= max) {
            return Err(unattainable(
                "dtvr",
                d,
                format!("reachable range is ({min:.6}, {max:.6}] with p_hard = {pinned}"),
            ));
        }
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if at(mid) < d {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        cfg.crops.scale = hi;
    }

    let routed = cfg.difficulty.route_probability(tau);
    let crop = crop_bytes_mean(&cfg, cfg.crops.scale);
    let d = f.dtvr(routed, crop);
    let e = target.target_ecr;
    let compute_ratio = f.compute_j(routed) / f.cloud_j;
    let jpb = f.n * (f.compute_j(routed) - e * f.cloud_j) / (f.baseline_bytes * (e - d));
    if !(jpb.is_finite() && jpb > 0.0) {
        let (lo, hi) = if d < compute_ratio {
            (d, compute_ratio)
        } else {
            (compute_ratio, d)
        };
        return Err(unattainable(
            "ecr",
            e,
            format!("must lie strictly between {lo:.6} and {hi:.6}"),
        ));
    }
    cfg.channel.joules_per_byte = jpb;
    cfg.calibration = Some(target);
    let stem = cfg.name.strip_suffix("-default").unwrap_or(&cfg.name).to_string();
    cfg.name = format!("{stem}-calibrated");
    Ok(cfg)
}
