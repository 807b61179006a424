//! Scalar abstraction for the numeric kernels.

use std::fmt::Debug;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssignOps};

/// Floating-point scalar the DSP and network kernels are generic over.
///
/// Implemented for `f32` (the inference path) and `f64` (oracles and
/// high-precision analysis).
pub trait Real:
    Float + FromPrimitive + NumAssignOps + Sum + Default + Debug + Send + Sync + 'static
{
    /// Lossy conversion from `f64`. Panics only for types that cannot
    /// represent any `f64` approximation, which neither `f32` nor `f64` is.
    #[inline]
    fn from_f64c(v: f64) -> Self {
        Self::from_f64(v).expect("f64 conversion")
    }

    #[inline]
    fn from_usizec(v: usize) -> Self {
        Self::from_usize(v).expect("usize conversion")
    }

    #[inline]
    fn to_f64c(self) -> f64 {
        self.to_f64().expect("to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
