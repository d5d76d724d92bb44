//! Temperature-scaled KL alignment between pyramid branches and its
//! decaying temperature schedule.

use serde::{Deserialize, Serialize};

use super::{shape_mismatch, softmax, MathError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct RefinementSchedule<S: Scalar = f64> {
    pub initial_temperature: S,
    pub epoch: u32,
}

/// `T_e = 0.5 ^ (e / -log2(0.0625 / T))`, evaluated exactly as written.
///
/// Note this yields `T_0 = 1` for every `T`; the initial temperature only
/// sets the decay rate (for `T = 128` the value halves every 11 epochs).
pub fn temperature_at_epoch<S: Scalar>(s: &RefinementSchedule<S>) -> Result<S, MathError> {
    let t = s.initial_temperature;
    if !t.is_finite() || t <= S::zero() {
        return Err(MathError::BadTemperature(t.to_f64_lossy()));
    }
    let period = -(S::lit(0.0625) / t).log2();
    if period == S::zero() {
        return Err(MathError::DegenerateSchedule(t.to_f64_lossy()));
    }
    let epoch = S::from_u32(s.epoch).expect("epoch representable");
    Ok(S::lit(0.5).powf(epoch / period))
}

pub fn log_softmax<S: Scalar>(v: &[S]) -> Vec<S> {
    let peak = v.iter().fold(S::neg_infinity(), |m, &x| m.max(x));
    let log_total = v
        .iter()
        .fold(S::zero(), |a, &x| a + (x - peak).exp())
        .ln();
    v.iter().map(|&x| x - peak - log_total).collect()
}

/// `KL(softmax(y2/t) || softmax(y1/t)) = sum q (log q - log_softmax(y1/t))`.
pub fn refinement_loss<S: Scalar>(y1: &[S], y2: &[S], t: S) -> Result<S, MathError> {
    if y1.len() != y2.len() {
        return Err(shape_mismatch(y1.len(), y2.len()));
    }
    if !t.is_finite() || t <= S::zero() {
        return Err(MathError::BadTemperature(t.to_f64_lossy()));
    }
    if y1.is_empty() {
        return Ok(S::zero());
    }
    let scaled1: Vec<S> = y1.iter().map(|&v| v / t).collect();
    let scaled2: Vec<S> = y2.iter().map(|&v| v / t).collect();
    let lp = log_softmax(&scaled1);
    let log_q = log_softmax(&scaled2);
    let q = softmax(&scaled2);
    let kl = q
        .iter()
        .zip(log_q.iter().zip(&lp))
        .filter(|(&qi, _)| qi > S::zero())
        .fold(S::zero(), |acc, (&qi, (&lq, &lpi))| acc + qi * (lq - lpi));
    Ok(kl.max(S::zero()))
}

pub fn backend_total_loss<S: Scalar>(loss_bs: S, loss_r: S) -> S {
    loss_bs + loss_r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp(t: f64, e: u32) -> f64 {
        temperature_at_epoch(&RefinementSchedule {
            initial_temperature: t,
            epoch: e,
        })
        .unwrap()
    }

    #[test]
    fn schedule_values() {
        assert_eq!(temp(128.0, 0), 1.0);
        assert_eq!(temp(128.0, 11), 0.5);
        assert_eq!(temp(128.0, 22), 0.25);
        assert!(temp(128.0, 5) > temp(128.0, 6));
    }

    #[test]
    fn schedule_errors() {
        let s = RefinementSchedule {
            initial_temperature: 0.0625,
            epoch: 3,
        };
        assert_eq!(
            temperature_at_epoch(&s),
            Err(MathError::DegenerateSchedule(0.0625))
        );
        let s = RefinementSchedule {
            initial_temperature: -1.0,
            epoch: 3,
        };
        assert!(matches!(
            temperature_at_epoch(&s),
            Err(MathError::BadTemperature(_))
        ));
    }

    #[test]
    fn kl_cases() {
        let y = [0.3, -1.2, 2.0];
        assert_eq!(refinement_loss(&y, &y, 4.0).unwrap(), 0.0);
        let shifted: Vec<f64> = y.iter().map(|v| v + 7.5).collect();
        assert!(refinement_loss(&shifted, &y, 2.0).unwrap() < 1e-15);
        // q = (1/4, 3/4), lp = (-ln 2, -ln 2)
        let kl = refinement_loss(&[0.0, 0.0], &[0.0, 3f64.ln()], 1.0).unwrap();
        assert!((kl - 0.13081203594113696).abs() < 1e-15);
        assert!(refinement_loss(&[0.0], &[0.0, 1.0], 1.0).is_err());
        assert!(refinement_loss(&[0.0], &[0.0], 0.0).is_err());
    }

    #[test]
    fn log_softmax_matches_softmax() {
        let v = [1.0f64, -3.0, 0.5];
        for (l, p) in log_softmax(&v).iter().zip(softmax(&v)) {
            assert!((l.exp() - p).abs() < 1e-15);
        }
    }

    #[test]
    fn total_is_sum() {
        assert_eq!(backend_total_loss(0.0, 0.0), 0.0);
        assert_eq!(backend_total_loss(0.3, 0.2), 0.5);
    }
}
