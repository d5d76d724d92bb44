use serde::{Deserialize, Serialize};

use super::{shape_mismatch, MathError};
use crate::scalar::Scalar;

/// Dense `C x H x W` feature map, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensor3<S>", bound = "S: Scalar")]
pub struct Tensor3<S: Scalar = f64> {
    dims: (usize, usize, usize),
    data: Vec<S>,
}

#[derive(Deserialize)]
#[serde(bound = "S: Scalar")]
struct RawTensor3<S: Scalar> {
    dims: (usize, usize, usize),
    data: Vec<S>,
}

impl<S: Scalar> TryFrom<RawTensor3<S>> for Tensor3<S> {
    type Error = MathError;

    fn try_from(raw: RawTensor3<S>) -> Result<Self, Self::Error> {
        Tensor3::new(raw.dims, raw.data)
    }
}

impl<S: Scalar> Tensor3<S> {
    pub fn new(dims: (usize, usize, usize), data: Vec<S>) -> Result<Self, MathError> {
        let (c, h, w) = dims;
        if c == 0 || h == 0 || w == 0 {
            return Err(MathError::EmptyDims(dims));
        }
        if data.len() != c * h * w {
            return Err(shape_mismatch(c * h * w, data.len()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(MathError::NonFinite("tensor data"));
        }
        Ok(Self { dims, data })
    }

    pub fn filled(dims: (usize, usize, usize), value: S) -> Result<Self, MathError> {
        Self::new(dims, vec![value; dims.0 * dims.1 * dims.2])
    }

    pub fn from_fn(
        dims: (usize, usize, usize),
        mut f: impl FnMut(usize, usize, usize) -> S,
    ) -> Result<Self, MathError> {
        let (c, h, w) = dims;
        let mut data = Vec::with_capacity(c * h * w);
        for ci in 0..c {
            for hi in 0..h {
                for wi in 0..w {
                    data.push(f(ci, hi, wi));
                }
            }
        }
        Self::new(dims, data)
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn channels(&self) -> usize {
        self.dims.0
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn get(&self, c: usize, h: usize, w: usize) -> S {
        let (_, hh, ww) = self.dims;
        self.data[(c * hh + h) * ww + w]
    }

    /// The `H*W` spatial values of channel `c`.
    pub fn channel(&self, c: usize) -> &[S] {
        let plane = self.dims.1 * self.dims.2;
        &self.data[c * plane..(c + 1) * plane]
    }

    pub fn sum(&self) -> S {
        self.data.iter().fold(S::zero(), |acc, &v| acc + v)
    }
}

/// Fully connected layer `y = W x + b` with `W` stored row-major
/// (`outputs x inputs`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct DenseLayer<S: Scalar = f64> {
    inputs: usize,
    outputs: usize,
    weights: Vec<S>,
    bias: Vec<S>,
}

impl<S: Scalar> DenseLayer<S> {
    pub fn new(
        inputs: usize,
        outputs: usize,
        weights: Vec<S>,
        bias: Vec<S>,
    ) -> Result<Self, MathError> {
        if weights.len() != inputs * outputs {
            return Err(shape_mismatch(
                format!("{outputs}x{inputs} weights"),
                weights.len(),
            ));
        }
        if bias.len() != outputs {
            return Err(shape_mismatch(format!("{outputs} biases"), bias.len()));
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(MathError::NonFinite("dense layer"));
        }
        Ok(Self {
            inputs,
            outputs,
            weights,
            bias,
        })
    }

    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self::new(
            inputs,
            outputs,
            vec![S::zero(); inputs * outputs],
            vec![S::zero(); outputs],
        )
        .expect("zero layer is well formed")
    }

    pub fn identity(n: usize) -> Self {
        let mut weights = vec![S::zero(); n * n];
        for i in 0..n {
            weights[i * n + i] = S::one();
        }
        Self::new(n, n, weights, vec![S::zero(); n]).expect("identity layer is well formed")
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn weight(&self, out: usize, inp: usize) -> S {
        self.weights[out * self.inputs + inp]
    }

    pub fn bias(&self) -> &[S] {
        &self.bias
    }

    pub fn forward(&self, x: &[S]) -> Result<Vec<S>, MathError> {
        if x.len() != self.inputs {
            return Err(shape_mismatch(self.inputs, x.len()));
        }
        Ok(self
            .weights
            .chunks_exact(self.inputs)
            .zip(&self.bias)
            .map(|(row, &b)| row.iter().zip(x).fold(b, |acc, (&w, &v)| acc + w * v))
            .collect())
    }
}
