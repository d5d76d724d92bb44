use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{OracleError, SeededRng};

const ROW_TOLERANCE: f64 = 1e-9;

/// Row-stochastic `C x C` matrix: row `t` is the predicted-class
/// distribution for true class `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct ConfusionMatrix {
    rows: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawMatrix {
    rows: Vec<Vec<f64>>,
}

impl TryFrom<RawMatrix> for ConfusionMatrix {
    type Error = OracleError;

    fn try_from(raw: RawMatrix) -> Result<Self, Self::Error> {
        ConfusionMatrix::new(raw.rows)
    }
}

impl ConfusionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, OracleError> {
        let n = rows.len();
        if n < 2 {
            return Err(OracleError::BadMatrix(format!("need >= 2 classes, got {n}")));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(OracleError::BadMatrix(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(OracleError::BadMatrix(format!("row {i} has an entry outside [0, 1]")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > ROW_TOLERANCE {
                return Err(OracleError::BadMatrix(format!("row {i} sums to {total}")));
            }
        }
        Ok(Self { rows })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(
            (0..n)
                .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
        .expect("identity is row-stochastic")
    }

    pub fn uniform(n: usize) -> Self {
        Self::new(vec![vec![1.0 / n as f64; n]; n]).expect("uniform is row-stochastic")
    }

    pub fn classes(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, class: usize) -> &[f64] {
        &self.rows[class]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Per-class accuracy (the diagonal).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.classes()).map(|i| self.rows[i][i]).collect()
    }

    fn check(&self, class: usize) -> Result<(), OracleError> {
        if class < self.classes() {
            Ok(())
        } else {
            Err(OracleError::BadClassIndex {
                class,
                count: self.classes(),
            })
        }
    }
}

/// Inverse-CDF draw from `weights` (need not be normalized) using a single
/// uniform. Returns `None` when all weights are zero.
fn sample_weighted(weights: impl Iterator<Item = (usize, f64)> + Clone, u: f64) -> Option<usize> {
    let total: f64 = weights.clone().map(|(_, w)| w).sum();
    if total <= 0.0 {
        return None;
    }
    let target = u * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, w) in weights {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = Some(i);
        if target < acc {
            return Some(i);
        }
    }
    last
}

/// Samples a predicted class from row `true_class`. Consumes one uniform.
pub fn classify(
    true_class: usize,
    cm: &ConfusionMatrix,
    rng: &mut SeededRng,
) -> Result<usize, OracleError> {
    cm.check(true_class)?;
    let u: f64 = rng.random();
    Ok(sample_weighted(cm.row(true_class).iter().copied().enumerate(), u)
        .expect("row sums to one"))
}

/// Prediction whose correctness was decided in advance.
///
/// Correct predictions return `true_class`; wrong ones are drawn from the
/// off-diagonal mass of the row (uniform over the other classes when the
/// row has none). Consumes one uniform either way.
pub fn classify_conditioned(
    true_class: usize,
    correct: bool,
    cm: &ConfusionMatrix,
    rng: &mut SeededRng,
) -> Result<usize, OracleError> {
    cm.check(true_class)?;
    let u: f64 = rng.random();
    if correct {
        return Ok(true_class);
    }
    let off_diagonal = cm
        .row(true_class)
        .iter()
        .copied()
        .enumerate()
        .filter(move |&(i, _)| i != true_class);
    Ok(sample_weighted(off_diagonal, u).unwrap_or_else(|| {
        let others = (0..cm.classes()).filter(|&i| i != true_class).map(|i| (i, 1.0));
        sample_weighted(others, u).expect("at least two classes")
    }))
}
