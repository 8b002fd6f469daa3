//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the spectral calculus is written against (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Magnitude above which a per-mode factor counts as overflow.
    const OVERFLOW_LIMIT: Self;

    /// Converts an `f64` literal; out-of-range values saturate to infinity.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(Self::nan)
    }

    #[inline]
    fn from_count(k: u64) -> Self {
        Self::from_u64(k).unwrap_or_else(Self::infinity)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const OVERFLOW_LIMIT: f64 = 1e300;
}

impl Real for f32 {
    const OVERFLOW_LIMIT: f32 = 1e36;
}

/// `x * y` as an unevaluated sum `hi + lo` (exact up to underflow).
#[inline]
pub(crate) fn two_product<S: Real>(x: S, y: S) -> (S, S) {
    let hi = x * y;
    let lo = x.mul_add(y, -hi);
    (hi, lo)
}

/// cos(x*y) with the rounding error of the product folded back in.
#[inline]
pub(crate) fn cos_of_product<S: Real>(x: S, y: S) -> S {
    let (hi, lo) = two_product(x, y);
    hi.cos() - hi.sin() * lo
}

/// sin(x*y) with the rounding error of the product folded back in.
#[inline]
pub(crate) fn sin_of_product<S: Real>(x: S, y: S) -> S {
    let (hi, lo) = two_product(x, y);
    hi.sin() + hi.cos() * lo
}

/// Threshold beyond which `e^{-2x}` no longer affects `cosh`/`sinh` at working precision.
#[inline]
fn large_argument<S: Real>() -> S {
    (S::lit(2.0) / S::epsilon()).ln() * S::lit(0.5)
}

/// cosh(x), evaluated as `exp(|x| - ln 2)` for large arguments so it stays finite a little longer.
pub(crate) fn cosh<S: Real>(x: S) -> S {
    let a = x.abs();
    if a > large_argument::<S>() {
        (a - S::LN_2()).exp()
    } else {
        a.cosh()
    }
}

pub(crate) fn sinh<S: Real>(x: S) -> S {
    let a = x.abs();
    if a > large_argument::<S>() {
        (a - S::LN_2()).exp().copysign(x)
    } else {
        x.sinh()
    }
}

/// sech(x) = 2e^{-|x|} / (1 + e^{-2|x|}); never overflows, underflows only to zero.
pub(crate) fn sech<S: Real>(x: S) -> S {
    let e = (-x.abs()).exp();
    S::lit(2.0) * e / (S::one() + e * e)
}

/// sech(x)^2 = 4e^{-2|x|} / (1 + e^{-2|x|})^2, the complement of tanh(x)^2.
pub(crate) fn sech_squared<S: Real>(x: S) -> S {
    let e2 = (-S::lit(2.0) * x.abs()).exp();
    let d = S::one() + e2;
    S::lit(4.0) * e2 / (d * d)
}

/// Pairwise summation in ascending index order; the order is fixed so results are reproducible.
pub fn pairwise_sum<S: Real>(values: &[S]) -> S {
    const BLOCK: usize = 16;
    if values.len() <= BLOCK {
        values.iter().fold(S::zero(), |acc, &v| acc + v)
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// `x^k` by binary exponentiation.
pub(crate) fn powu<S: Real>(x: S, mut k: u64) -> S {
    let mut base = x;
    let mut acc = S::one();
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * base;
        }
        k >>= 1;
        if k > 0 {
            base = base * base;
        }
    }
    acc
}
