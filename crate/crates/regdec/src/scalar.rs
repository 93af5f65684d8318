//! Scalar abstraction for the numeric routines.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign};

/// Real scalar the cost and theory routines are generic over: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + NumAssign + Debug + Display + Send + Sync + 'static {
    /// Lossless-enough conversion from an `f64` literal.
    fn from_f64_lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal conversion")
    }

    /// Conversion from a count or hop distance.
    fn from_count(x: u64) -> Self {
        Self::from_u64(x).expect("count conversion")
    }
}

impl Real for f32 {}
impl Real for f64 {}
