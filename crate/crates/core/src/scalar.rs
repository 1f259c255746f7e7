//! Real scalar types the simulator can run on.
//!
//! Everything is generic over [`Scalar`]. `f64` is the default and is what the
//! CLI and the C interface use. [`Wide`] (a 237-bit significand float) exists for
//! values whose `Real4` denominator falls far below double-precision resolution,
//! e.g. the result of repeated squaring.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_traits::Num;

pub use f256::f256 as Wide;

pub trait Scalar:
    Num + Copy + PartialOrd + Neg<Output = Self> + Debug + Display + Send + Sync + 'static
{
    /// Short name used in reports.
    const NAME: &'static str;

    fn from_f64(x: f64) -> Self;

    /// Nearest `f64`.
    fn to_f64(self) -> f64;

    fn sqrt(self) -> Self;

    fn abs(self) -> Self;

    fn is_finite(self) -> bool;

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    const NAME: &'static str = "f64";

    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }

    fn abs(self) -> Self {
        f64::abs(self)
    }

    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for Wide {
    const NAME: &'static str = "f256";

    fn from_f64(x: f64) -> Self {
        Wide::from(x)
    }

    fn to_f64(self) -> f64 {
        // f256 has no direct narrowing conversion; its scientific formatting is
        // exact to the full significand, so parsing it back rounds correctly.
        if self.eq_zero() {
            return 0.0;
        }
        format!("{self:e}").parse().unwrap_or(f64::NAN)
    }

    fn sqrt(self) -> Self {
        Wide::sqrt(self)
    }

    fn abs(self) -> Self {
        Wide::abs(&self)
    }

    fn is_finite(self) -> bool {
        Wide::is_finite(self)
    }
}
