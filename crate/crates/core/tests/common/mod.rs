//! Independent reference implementations used as test oracles. None of
//! these share code with the library.

#![allow(dead_code)]

use ecosense::domain::BoundingBox;
use ecosense::modelmath::ScoredBox;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn fixture_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Neumaier compensated sum.
pub fn ksum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn iou_ref(a: [f64; 4], b: [f64; 4]) -> f64 {
    let w = (a[2].min(b[2]) - a[0].max(b[0])).max(0.0);
    let h = (a[3].min(b[3]) - a[1].max(b[1])).max(0.0);
    let inter = w * h;
    if inter == 0.0 {
        return 0.0;
    }
    let area = |r: [f64; 4]| (r[2] - r[0]) * (r[3] - r[1]);
    inter / (area(a) + area(b) - inter)
}

pub fn corners(b: &BoundingBox) -> [f64; 4] {
    [b.x_min(), b.y_min(), b.x_max(), b.y_max()]
}

/// Fixed-point formulation of greedy suppression: a box survives iff no
/// surviving box ranked above it overlaps it by more than `thr`. Iterated to
/// convergence with no sorting shortcut; returns surviving input indices
/// in rank order.
pub fn nms_ref(boxes: &[ScoredBox], thr: f64) -> Vec<usize> {
    let n = boxes.len();
    // j outranks i: higher score, or equal score and earlier position
    let outranks =
        |j: usize, i: usize| boxes[j].score > boxes[i].score || (boxes[j].score == boxes[i].score && j < i);
    let mut keep = vec![true; n];
    loop {
        let next: Vec<bool> = (0..n)
            .map(|i| {
                !(0..n).any(|j| {
                    j != i
                        && keep[j]
                        && outranks(j, i)
                        && iou_ref(corners(&boxes[j].bbox), corners(&boxes[i].bbox)) > thr
                })
            })
            .collect();
        if next == keep {
            break;
        }
        keep = next;
    }
    let mut out: Vec<usize> = (0..n).filter(|&i| keep[i]).collect();
    out.sort_by(|&a, &b| {
        if outranks(a, b) {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Greater
        }
    });
    out
}

pub fn random_box(rng: &mut impl Rng, extent: f64) -> BoundingBox {
    let x0 = rng.random_range(0.0..extent * 0.9);
    let y0 = rng.random_range(0.0..extent * 0.9);
    let w = rng.random_range(1.0..extent * 0.3);
    let h = rng.random_range(1.0..extent * 0.3);
    BoundingBox::new(x0, y0, x0 + w, y0 + h).unwrap()
}

/// Up to `max` boxes clustered in a small canvas so overlaps are common;
/// scores come from a coarse grid so ties occur.
pub fn random_scored_boxes(rng: &mut impl Rng, max: usize) -> Vec<ScoredBox> {
    let n = rng.random_range(0..=max);
    (0..n)
        .map(|_| ScoredBox {
            bbox: random_box(rng, 100.0),
            score: f64::from(rng.random_range(0..20u32)) / 20.0,
        })
        .collect()
}

pub fn random_vec(rng: &mut impl Rng, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-scale..scale)).collect()
}

/// Softmax without max shifting, summed with compensation.
pub fn softmax_ref(v: &[f64]) -> Vec<f64> {
    let e: Vec<f64> = v.iter().map(|x| x.exp()).collect();
    let z = ksum(e.iter().copied());
    e.into_iter().map(|x| x / z).collect()
}

pub fn cross_entropy_ref(y: &[f64], p: &[f64]) -> f64 {
    -ksum(
        y.iter()
            .zip(p)
            .filter(|(yi, _)| **yi != 0.0)
            .map(|(yi, pi)| yi * pi.max(1e-12).ln()),
    )
}

pub fn suppression_ref(y: &[f64]) -> f64 {
    // tanh(x) + 1 = 2 / (1 + e^{-2x})
    ksum(y.iter().map(|x| {
        let r = 2.0 / (1.0 + (-2.0 * x).exp());
        r * r
    }))
}

/// `sum q ln(q / p)` with `p = softmax(y1/t)`, `q = softmax(y2/t)`.
pub fn refinement_ref(y1: &[f64], y2: &[f64], t: f64) -> f64 {
    let p = softmax_ref(&y1.iter().map(|v| v / t).collect::<Vec<_>>());
    let q = softmax_ref(&y2.iter().map(|v| v / t).collect::<Vec<_>>());
    ksum(
        q.iter()
            .zip(&p)
            .filter(|(qi, _)| **qi > 0.0)
            .map(|(qi, pi)| qi * (qi / pi).ln()),
    )
}

/// Column-wise softmax of a row-major `rows x cols` matrix.
pub fn score_map_ref(rows: usize, cols: usize, data: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for c in 0..cols {
        let col: Vec<f64> = (0..rows).map(|r| data[r * cols + c]).collect();
        for (r, p) in softmax_ref(&col).into_iter().enumerate() {
            out[r * cols + c] = p;
        }
    }
    out
}

/// Pearson statistic for observed counts against expected probabilities,
/// skipping zero-probability cells (which must have zero counts).
pub fn chi_square(counts: &[u64], probs: &[f64]) -> (f64, usize) {
    let n: u64 = counts.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&c, &p) in counts.iter().zip(probs) {
        if p == 0.0 {
            assert_eq!(c, 0, "draw from a zero-probability cell");
            continue;
        }
        let e = p * n as f64;
        stat += (c as f64 - e).powi(2) / e;
        cells += 1;
    }
    (stat, cells.saturating_sub(1))
}

/// `|observed_rate - p| <= 3 sigma` for `n` Bernoulli(p) trials.
pub fn within_3_sigma(hits: u64, n: u64, p: f64) -> bool {
    let rate = hits as f64 / n as f64;
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    (rate - p).abs() <= 3.0 * sigma + f64::EPSILON
}
