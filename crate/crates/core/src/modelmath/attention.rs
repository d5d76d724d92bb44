//! Channel squeeze-excitation plus coordinate (height/width) attention,
//! run in parallel on one input and merged through a sum-to-one normalizer.

use serde::{Deserialize, Serialize};

use super::{shape_mismatch, DenseLayer, MathError, Tensor3};
use crate::scalar::Scalar;

pub fn sigmoid<S: Scalar>(x: S) -> S {
    S::one() / (S::one() + (-x).exp())
}

/// Channel squeeze: mean of each channel over all spatial positions.
pub fn global_avg_pool<S: Scalar>(x: &Tensor3<S>) -> Vec<S> {
    let (c, h, w) = x.dims();
    let n = S::from_count(h * w);
    (0..c)
        .map(|ci| x.channel(ci).iter().fold(S::zero(), |a, &v| a + v) / n)
        .collect()
}

/// Coordinate squeeze: `(height, width)` where `height[h]` averages row `h`
/// over channels and columns and `width[w]` averages column `w` over
/// channels and rows.
pub fn coordinate_pool<S: Scalar>(x: &Tensor3<S>) -> (Vec<S>, Vec<S>) {
    let (c, h, w) = x.dims();
    let mut height = vec![S::zero(); h];
    let mut width = vec![S::zero(); w];
    for ci in 0..c {
        for (hi, row) in height.iter_mut().enumerate() {
            for (wi, col) in width.iter_mut().enumerate() {
                let v = x.get(ci, hi, wi);
                *row += v;
                *col += v;
            }
        }
    }
    let per_row = S::from_count(c * w);
    let per_col = S::from_count(c * h);
    height.iter_mut().for_each(|v| *v /= per_row);
    width.iter_mut().for_each(|v| *v /= per_col);
    (height, width)
}

/// Excitation: two dense layers with ReLU between them and a final sigmoid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ExcitationBlock<S: Scalar = f64> {
    squeeze: DenseLayer<S>,
    expand: DenseLayer<S>,
}

impl<S: Scalar> ExcitationBlock<S> {
    pub fn new(squeeze: DenseLayer<S>, expand: DenseLayer<S>) -> Result<Self, MathError> {
        if squeeze.outputs() != expand.inputs() {
            return Err(shape_mismatch(
                format!("hidden width {}", squeeze.outputs()),
                expand.inputs(),
            ));
        }
        if expand.outputs() != squeeze.inputs() {
            return Err(shape_mismatch(
                format!("output width {}", squeeze.inputs()),
                expand.outputs(),
            ));
        }
        Ok(Self { squeeze, expand })
    }

    /// All-zero block for a length-`width` input with hidden width
    /// `max(1, width / reduction)`.
    pub fn zeros(width: usize, reduction: usize) -> Self {
        let hidden = (width / reduction.max(1)).max(1);
        Self::new(
            DenseLayer::zeros(width, hidden),
            DenseLayer::zeros(hidden, width),
        )
        .expect("zero block is well formed")
    }

    pub fn width(&self) -> usize {
        self.squeeze.inputs()
    }

    pub fn layers(&self) -> (&DenseLayer<S>, &DenseLayer<S>) {
        (&self.squeeze, &self.expand)
    }
}

/// Maps a pooled descriptor to per-index weights in `(0, 1)`.
pub fn excite<S: Scalar>(v: &[S], block: &ExcitationBlock<S>) -> Result<Vec<S>, MathError> {
    let hidden: Vec<S> = block
        .squeeze
        .forward(v)?
        .into_iter()
        .map(|z| z.max(S::zero()))
        .collect();
    Ok(block.expand.forward(&hidden)?.into_iter().map(sigmoid).collect())
}

/// Excited per-axis descriptors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct AttentionDescriptors<S: Scalar = f64> {
    pub channel: Vec<S>,
    pub height: Vec<S>,
    pub width: Vec<S>,
}

/// Combines the three descriptors into a tensor of the input's shape whose
/// entries sum to one: `raw[c,h,w] = channel[c] * height[h] * width[w]`,
/// divided by the total.
pub fn attention_normalize<S: Scalar>(
    d: &AttentionDescriptors<S>,
    dims: (usize, usize, usize),
) -> Result<Tensor3<S>, MathError> {
    let (c, h, w) = dims;
    if d.channel.len() != c || d.height.len() != h || d.width.len() != w {
        return Err(shape_mismatch(
            format!("{c}/{h}/{w}"),
            format!("{}/{}/{}", d.channel.len(), d.height.len(), d.width.len()),
        ));
    }
    if d
        .channel
        .iter()
        .chain(&d.height)
        .chain(&d.width)
        .any(|v| !v.is_finite())
    {
        return Err(MathError::NonFinite("attention descriptors"));
    }
    // Rescale each axis by its largest magnitude first; equal descriptors
    // then become exact ones and the uniform case divides exactly.
    let unit = |v: &[S]| -> Option<Vec<S>> {
        let peak = v.iter().fold(S::zero(), |m, &x| m.max(x.abs()));
        (peak > S::zero()).then(|| v.iter().map(|&x| x / peak).collect())
    };
    let (Some(uc), Some(uh), Some(uw)) = (unit(&d.channel), unit(&d.height), unit(&d.width))
    else {
        return Err(MathError::DegenerateNormalizer);
    };
    // the outer product sums to the product of the three axis sums
    let sum = |v: &[S]| v.iter().fold(S::zero(), |a, &x| a + x);
    let total = sum(&uc) * sum(&uh) * sum(&uw);
    if total == S::zero() || !total.is_finite() {
        return Err(MathError::DegenerateNormalizer);
    }
    Tensor3::from_fn(dims, |ci, hi, wi| uc[ci] * uh[hi] * uw[wi] / total)
}

/// Elementwise product of the input and the normalized attention.
pub fn apply_attention<S: Scalar>(
    x: &Tensor3<S>,
    w_hat: &Tensor3<S>,
) -> Result<Tensor3<S>, MathError> {
    if x.dims() != w_hat.dims() {
        return Err(shape_mismatch(
            format!("{:?}", x.dims()),
            format!("{:?}", w_hat.dims()),
        ));
    }
    Tensor3::new(
        x.dims(),
        x.data()
            .iter()
            .zip(w_hat.data())
            .map(|(&a, &b)| a * b)
            .collect(),
    )
}

/// The full parallel attention module: squeeze along each axis, excite each
/// descriptor, normalize, and reweight the input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct AttentionBlock<S: Scalar = f64> {
    pub channel: ExcitationBlock<S>,
    pub height: ExcitationBlock<S>,
    pub width: ExcitationBlock<S>,
}

impl<S: Scalar> AttentionBlock<S> {
    pub fn descriptors(&self, x: &Tensor3<S>) -> Result<AttentionDescriptors<S>, MathError> {
        let (height, width) = coordinate_pool(x);
        Ok(AttentionDescriptors {
            channel: excite(&global_avg_pool(x), &self.channel)?,
            height: excite(&height, &self.height)?,
            width: excite(&width, &self.width)?,
        })
    }

    pub fn forward(&self, x: &Tensor3<S>) -> Result<Tensor3<S>, MathError> {
        let w_hat = attention_normalize(&self.descriptors(x)?, x.dims())?;
        apply_attention(x, &w_hat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_cases() {
        let t = Tensor3::filled((3, 2, 2), 1.25).unwrap();
        assert_eq!(global_avg_pool(&t), vec![1.25; 3]);
        let t = Tensor3::new((1, 1, 2), vec![2.0, 4.0]).unwrap();
        assert_eq!(global_avg_pool(&t), vec![3.0]);
    }

    #[test]
    fn coordinate_pool_hand_case() {
        let t = Tensor3::new((1, 2, 2), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(coordinate_pool(&t), (vec![1.5, 3.5], vec![2.0, 3.0]));
        let t = Tensor3::filled((2, 3, 4), -0.5).unwrap();
        let (h, w) = coordinate_pool(&t);
        assert_eq!(h, vec![-0.5; 3]);
        assert_eq!(w, vec![-0.5; 4]);
    }

    #[test]
    fn excite_trivial_blocks() {
        let zero = ExcitationBlock::<f64>::zeros(8, 4);
        assert_eq!(excite(&[3.0; 8], &zero).unwrap(), vec![0.5; 8]);
        let ident = ExcitationBlock::new(DenseLayer::identity(3), DenseLayer::identity(3)).unwrap();
        assert_eq!(excite(&[0.0; 3], &ident).unwrap(), vec![0.5; 3]);
        assert!(excite(&[0.0; 2], &ident).is_err());
    }

    #[test]
    fn excitation_shape_checks() {
        assert!(ExcitationBlock::<f64>::new(DenseLayer::zeros(4, 2), DenseLayer::zeros(3, 4)).is_err());
        assert!(ExcitationBlock::<f64>::new(DenseLayer::zeros(4, 2), DenseLayer::zeros(2, 3)).is_err());
    }

    #[test]
    fn normalize_uniform_and_scalar() {
        let d = AttentionDescriptors {
            channel: vec![0.7; 2],
            height: vec![0.7; 3],
            width: vec![0.7; 4],
        };
        let w = attention_normalize(&d, (2, 3, 4)).unwrap();
        assert!(w.data().iter().all(|&v| v == 1.0 / 24.0));

        let d = AttentionDescriptors {
            channel: vec![0.3],
            height: vec![0.9],
            width: vec![0.2],
        };
        assert_eq!(attention_normalize(&d, (1, 1, 1)).unwrap().data(), &[1.0]);
    }

    #[test]
    fn normalize_errors() {
        let d = AttentionDescriptors {
            channel: vec![0.0, 0.0],
            height: vec![1.0],
            width: vec![1.0],
        };
        assert_eq!(
            attention_normalize(&d, (2, 1, 1)),
            Err(MathError::DegenerateNormalizer)
        );
        assert!(matches!(
            attention_normalize(&d, (3, 1, 1)),
            Err(MathError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn apply_identity_and_zero() {
        let x = Tensor3::from_fn((2, 2, 2), |c, h, w| (c + 2 * h + 3 * w) as f64).unwrap();
        let ones = Tensor3::filled((2, 2, 2), 1.0).unwrap();
        assert_eq!(apply_attention(&x, &ones).unwrap(), x);
        let zeros = Tensor3::filled((2, 2, 2), 0.0).unwrap();
        assert_eq!(apply_attention(&zeros, &x).unwrap(), zeros);
        let other = Tensor3::filled((1, 2, 2), 1.0).unwrap();
        assert!(apply_attention(&x, &other).is_err());
    }

    #[test]
    fn block_forward_zero_weights_is_uniform_reweight() {
        let x = Tensor3::from_fn((2, 3, 2), |c, h, w| (1 + c + h + w) as f64).unwrap();
        let block = AttentionBlock {
            channel: ExcitationBlock::zeros(2, 2),
            height: ExcitationBlock::zeros(3, 2),
            width: ExcitationBlock::zeros(2, 2),
        };
        let y = block.forward(&x).unwrap();
        for (a, b) in y.data().iter().zip(x.data()) {
            assert!((a - b / 12.0).abs() < 1e-15);
        }
    }

    #[test]
    fn works_in_f32() {
        let d = AttentionDescriptors::<f32> {
            channel: vec![0.2, 0.8],
            height: vec![0.5, 0.1],
            width: vec![0.9],
        };
        let w = attention_normalize(&d, (2, 2, 1)).unwrap();
        assert!((w.sum() - 1.0).abs() < 1e-6);
    }
}
