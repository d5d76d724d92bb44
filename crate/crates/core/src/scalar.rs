//! Scalar abstraction for the tensor and geometry math.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign, NumCast};
use serde::{de::DeserializeOwned, Serialize};

/// floating point: f32 or f64
pub trait Scalar:
    Float
    + FromPrimitive
    + NumCast
    + NumAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal into this scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count into this scalar type.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Sum-to-one tolerance appropriate for accumulating `len` terms.
    fn sum_tolerance(base: f64, len: usize) -> Self {
        Self::lit(base).max(Self::epsilon() * Self::from_count(4 * len.max(1)))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
