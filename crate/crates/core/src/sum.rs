//! Compensated floating-point accumulation.

use core::ops::AddAssign;

/// A running sum kept as an unevaluated pair `hi + lo` (double-double).
///
/// Each addition uses an error-free two-sum, so the pair carries the
/// exact sum of the addends to roughly twice the working precision.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Compensated {
    hi: f64,
    lo: f64,
}

impl Compensated {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.hi, x);
        let lo = self.lo + e;
        let (hi, lo) = fast_two_sum(s, lo);
        self.hi = hi;
        self.lo = lo;
    }

    /// Adds the exact product `a · b`, including the rounding error of the
    /// floating-point multiplication.
    pub fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        let e = libm::fma(a, b, -p);
        self.add(p);
        self.add(e);
    }

    pub fn merge(&mut self, other: &Compensated) {
        self.add(other.hi);
        self.add(other.lo);
    }

    /// `self · a`, rounded once to double-double.
    pub fn scaled(&self, a: f64) -> Compensated {
        let p = self.hi * a;
        let e = libm::fma(self.hi, a, -p);
        let (hi, lo) = fast_two_sum(p, self.lo * a + e);
        Compensated { hi, lo }
    }

    pub fn value(&self) -> f64 {
        self.hi + self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    /// `self − other`, evaluated on both components before rounding.
    pub fn difference(&self, other: &Compensated) -> f64 {
        (self.hi - other.hi) + (self.lo - other.lo)
    }
}

impl AddAssign<f64> for Compensated {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl core::iter::Sum<f64> for Compensated {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Compensated::ZERO;
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

fn fast_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}
