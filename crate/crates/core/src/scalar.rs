//! Scalar abstraction shared by the numeric modules.

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating point type the weight models, pmfs and statistics are generic over.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Slack allowed on `Σ masses + tail = 1`.
    fn normalization_tolerance() -> Self;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Scalar for f64 {
    fn normalization_tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn normalization_tolerance() -> Self {
        1e-5
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum<F> {
    sum: F,
    carry: F,
}

impl<F: Scalar> CompensatedSum<F> {
    pub fn new() -> Self {
        Self { sum: F::zero(), carry: F::zero() }
    }

    pub fn add(&mut self, x: F) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> F {
        self.sum + self.carry
    }
}

/// Compensated sum of a sequence, in iteration order.
pub fn compensated_sum<F: Scalar, I: IntoIterator<Item = F>>(xs: I) -> F {
    let mut acc = CompensatedSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// `ln(r!)` for `r = 0..=r_max`.
pub fn ln_factorials<F: Scalar>(r_max: usize) -> Vec<F> {
    let mut out = Vec::with_capacity(r_max + 1);
    let mut acc = 0.0f64;
    out.push(F::zero());
    for r in 1..=r_max {
        acc += (r as f64).ln();
        out.push(F::lit(acc));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = std::iter::once(1.0f64).chain(std::iter::repeat_n(1e-16, 10_000));
        let s = compensated_sum(xs);
        assert!((s - (1.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn ln_factorials_small() {
        let t: Vec<f64> = ln_factorials(5);
        assert_eq!(t[0], 0.0);
        assert!((t[5] - 120f64.ln()).abs() < 1e-13);
    }
}
