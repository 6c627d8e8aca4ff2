use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Floating-point scalar accepted by every numerical routine in the crate.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    #[inline]
    fn usize(x: usize) -> Self {
        Self::from_usize(x).expect("index representable")
    }

    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().expect("finite conversion")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Pairwise (cascade) summation with a fixed reduction order.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    const BLOCK: usize = 128;
    if xs.len() <= BLOCK {
        let mut s = T::zero();
        for &x in xs {
            s += x;
        }
        s
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Pairwise sum of `f(i)` for `i in 0..len`, same reduction tree as [`pairwise_sum`].
pub fn pairwise_sum_by<T: Real, F: Fn(usize) -> T + Copy>(start: usize, len: usize, f: F) -> T {
    const BLOCK: usize = 128;
    if len <= BLOCK {
        let mut s = T::zero();
        for i in start..start + len {
            s += f(i);
        }
        s
    } else {
        let mid = len / 2;
        pairwise_sum_by(start, mid, f) + pairwise_sum_by(start + mid, len - mid, f)
    }
}
