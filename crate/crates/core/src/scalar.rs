use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::ScalarOperand;
use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar the models are generic over: `f32` or `f64`.
pub trait Real:
    Float
    + NumAssign
    + ScalarOperand
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Tolerance on row sums of stochastic vectors.
    const STOCHASTIC_TOL: Self;

    /// Converts an `f64` literal; every finite `f64` has a nearest `Self`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count fits in a float")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const STOCHASTIC_TOL: f64 = 1e-12;
}

impl Real for f32 {
    const STOCHASTIC_TOL: f32 = 1e-5;
}

/// Kahan-compensated sum.
pub(crate) fn compensated_sum<T: Real>(values: impl IntoIterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut carry = T::zero();
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Relative closeness with an absolute floor for values near zero.
pub fn close<T: Real>(a: T, b: T, rel: T) -> bool {
    if a == b {
        return true;
    }
    let scale = a.abs().max(b.abs()).max(T::one());
    (a - b).abs() <= rel * scale
}
