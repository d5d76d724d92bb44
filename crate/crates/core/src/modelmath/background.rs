//! Background suppression: per-category embedding and score maps, top-K
//! selection of confident spatial embeddings, and the classification and
//! suppression losses built from the two partitions.

use serde::{Deserialize, Serialize};

use super::{shape_mismatch, DenseLayer, MathError, Tensor3};
use crate::scalar::Scalar;

/// Guard added inside logarithms of probabilities.
pub const LOG_EPSILON: f64 = 1e-12;

/// Category-by-position map (`C_gt x H*W`), row-major by category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct EmbeddingMap<S: Scalar = f64> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> EmbeddingMap<S> {
    pub fn new(rows: usize, cols: usize, data: Vec<S>) -> Result<Self, MathError> {
        if rows < 2 || cols < 1 {
            return Err(MathError::BadEmbeddingShape { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(shape_mismatch(rows * cols, data.len()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(MathError::NonFinite("embedding map"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> S {
        self.data[row * self.cols + col]
    }

    pub fn column(&self, col: usize) -> Vec<S> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }
}

/// Softmax-normalized [`EmbeddingMap`]; every column sums to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ScoreMap<S: Scalar = f64>(EmbeddingMap<S>);

impl<S: Scalar> ScoreMap<S> {
    pub fn as_map(&self) -> &EmbeddingMap<S> {
        &self.0
    }

    pub fn get(&self, row: usize, col: usize) -> S {
        self.0.get(row, col)
    }

    pub fn column(&self, col: usize) -> Vec<S> {
        self.0.column(col)
    }
}

/// Per-category embeddings from a feature map: `Y = W h + b`, treating
/// `h` as `C x (H*W)` and `layer` as a `C_gt x C` projection.
pub fn embedding_map<S: Scalar>(
    h: &Tensor3<S>,
    layer: &DenseLayer<S>,
) -> Result<EmbeddingMap<S>, MathError> {
    let (c, hh, ww) = h.dims();
    if layer.inputs() != c {
        return Err(shape_mismatch(format!("{c} input channels"), layer.inputs()));
    }
    let positions = hh * ww;
    let mut data = Vec::with_capacity(layer.outputs() * positions);
    for k in 0..layer.outputs() {
        for p in 0..positions {
            let acc = (0..c).fold(layer.bias()[k], |acc, ci| {
                acc + layer.weight(k, ci) * h.channel(ci)[p]
            });
            data.push(acc);
        }
    }
    EmbeddingMap::new(layer.outputs(), positions, data)
}

/// Max-shifted softmax of one vector.
pub fn softmax<S: Scalar>(v: &[S]) -> Vec<S> {
    let peak = v.iter().fold(S::neg_infinity(), |m, &x| m.max(x));
    let exps: Vec<S> = v.iter().map(|&x| (x - peak).exp()).collect();
    let total = exps.iter().fold(S::zero(), |a, &x| a + x);
    exps.into_iter().map(|e| e / total).collect()
}

/// Softmax over the category axis, independently per column.
pub fn score_map<S: Scalar>(y: &EmbeddingMap<S>) -> ScoreMap<S> {
    let mut data = vec![S::zero(); y.data.len()];
    for col in 0..y.cols {
        for (row, p) in softmax(&y.column(col)).into_iter().enumerate() {
            data[row * y.cols + col] = p;
        }
    }
    ScoreMap(EmbeddingMap {
        rows: y.rows,
        cols: y.cols,
        data,
    })
}

/// Scalar score of each spatial column: its largest category probability.
pub fn column_scores<S: Scalar>(p: &ScoreMap<S>) -> Vec<S> {
    (0..p.0.cols)
        .map(|col| {
            p.column(col)
                .into_iter()
                .fold(S::neg_infinity(), |m, x| m.max(x))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct EmbeddingColumn<S: Scalar = f64> {
    pub index: usize,
    pub values: Vec<S>,
}

/// Top-K split of embedding columns into selected and dropped sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct EmbeddingPartition<S: Scalar = f64> {
    pub k: usize,
    /// Ordered by descending score.
    pub selected: Vec<EmbeddingColumn<S>>,
    /// Ordered by column index.
    pub dropped: Vec<EmbeddingColumn<S>>,
}

impl<S: Scalar> EmbeddingPartition<S> {
    pub fn selected_indices(&self) -> Vec<usize> {
        self.selected.iter().map(|c| c.index).collect()
    }

    pub fn dropped_indices(&self) -> Vec<usize> {
        self.dropped.iter().map(|c| c.index).collect()
    }

    /// All dropped values flattened, the input to [`suppression_loss`].
    pub fn dropped_values(&self) -> Vec<S> {
        self.dropped
            .iter()
            .flat_map(|c| c.values.iter().copied())
            .collect()
    }
}

/// Selects the `k` highest-scoring columns (ties go to the lower index).
pub fn topk_partition<S: Scalar>(
    scores: &[S],
    embeddings: &EmbeddingMap<S>,
    k: usize,
) -> Result<EmbeddingPartition<S>, MathError> {
    let cols = embeddings.cols();
    if scores.len() != cols {
        return Err(shape_mismatch(format!("{cols} column scores"), scores.len()));
    }
    if k == 0 || k > cols {
        return Err(MathError::KTooLarge { k, columns: cols });
    }
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let column = |index| EmbeddingColumn {
        index,
        values: embeddings.column(index),
    };
    let selected = order[..k].iter().map(|&i| column(i)).collect();
    let mut rest = order[k..].to_vec();
    rest.sort_unstable();
    Ok(EmbeddingPartition {
        k,
        selected,
        dropped: rest.into_iter().map(column).collect(),
    })
}

/// Concatenates the selected embeddings of several blocks (the graph vertex
/// embedding fed to the relation head).
pub fn concat_selected<S: Scalar>(parts: &[EmbeddingPartition<S>]) -> Vec<Vec<S>> {
    parts
        .iter()
        .flat_map(|p| p.selected.iter().map(|c| c.values.clone()))
        .collect()
}

/// Number of embeddings kept at each of the four pyramid blocks.
pub fn k_schedule(block: usize) -> Result<usize, MathError> {
    match block {
        1 => Ok(256),
        2 => Ok(128),
        3 => Ok(64),
        4 => Ok(32),
        other => Err(MathError::BadBlockIndex(other)),
    }
}

pub(crate) fn check_probability_vector<S: Scalar>(p: &[S]) -> Result<(), MathError> {
    if p.is_empty() {
        return Err(MathError::NotAProbabilityVector("empty".into()));
    }
    if p.iter().any(|&x| !x.is_finite() || x < S::zero()) {
        return Err(MathError::NotAProbabilityVector(
            "entries must be finite and >= 0".into(),
        ));
    }
    let total = p.iter().fold(S::zero(), |a, &x| a + x);
    if (total - S::one()).abs() > S::sum_tolerance(1e-6, p.len()) {
        return Err(MathError::NotAProbabilityVector(format!(
            "sums to {total}"
        )));
    }
    Ok(())
}

/// `-sum y_i ln(p_i)`, with `ln(0)` guarded by [`LOG_EPSILON`].
pub fn cross_entropy_loss<S: Scalar>(y_true: &[S], p: &[S]) -> Result<S, MathError> {
    if y_true.len() != p.len() {
        return Err(shape_mismatch(y_true.len(), p.len()));
    }
    check_probability_vector(p)?;
    let eps = S::lit(LOG_EPSILON);
    let loss = y_true
        .iter()
        .zip(p)
        .filter(|(&y, _)| y != S::zero())
        .fold(S::zero(), |acc, (&y, &pi)| acc - y * pi.max(eps).ln());
    Ok(loss.max(S::zero()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reduction {
    #[default]
    Sum,
    Mean,
}

/// Pushes dropped embeddings toward the pseudo label `-1`:
/// `sum (tanh(y) + 1)^2` (or its mean).
pub fn suppression_loss<S: Scalar>(y_d: &[S], reduction: Reduction) -> S {
    let total = y_d.iter().fold(S::zero(), |acc, &y| {
        let r = y.tanh() + S::one();
        acc + r * r
    });
    match reduction {
        Reduction::Sum => total,
        Reduction::Mean if y_d.is_empty() => S::zero(),
        Reduction::Mean => total / S::from_count(y_d.len()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct BsHyperParams<S: Scalar = f64> {
    lambda_e: S,
    lambda_d: S,
}

impl<S: Scalar> BsHyperParams<S> {
    pub fn new(lambda_e: S, lambda_d: S) -> Result<Self, MathError> {
        let ok = |v: S| v.is_finite() && v >= S::zero();
        if !(ok(lambda_e) && ok(lambda_d)) {
            return Err(MathError::BadHyperParams);
        }
        Ok(Self { lambda_e, lambda_d })
    }

    pub fn lambda_e(&self) -> S {
        self.lambda_e
    }

    pub fn lambda_d(&self) -> S {
        self.lambda_d
    }
}

impl<S: Scalar> Default for BsHyperParams<S> {
    fn default() -> Self {
        Self {
            lambda_e: S::one(),
            lambda_d: S::one(),
        }
    }
}

pub fn bs_loss<S: Scalar>(loss_e: S, loss_d: S, hp: &BsHyperParams<S>) -> S {
    hp.lambda_e * loss_e + hp.lambda_d * loss_d
}
