use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar used for amplitudes and probabilities.
pub trait Real: Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Normalization tolerance for state vectors.
    const NORM_TOLERANCE: Self;

    fn frac_1_sqrt_2() -> Self;

    /// Lossless for every implementor.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(Self::nan)
    }

    fn from_usize_lossy(x: usize) -> Self {
        Self::from_usize(x).unwrap_or_else(Self::nan)
    }
}

impl Real for f64 {
    const NORM_TOLERANCE: Self = 1e-12;

    fn frac_1_sqrt_2() -> Self {
        std::f64::consts::FRAC_1_SQRT_2
    }
}

impl Real for f32 {
    const NORM_TOLERANCE: Self = 1e-6;

    fn frac_1_sqrt_2() -> Self {
        std::f32::consts::FRAC_1_SQRT_2
    }
}

/// Kahan-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self { sum: T::zero(), carry: T::zero() }
    }

    pub fn add(&mut self, x: T) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum
    }
}

impl<T: Real> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_beats_naive_on_small_terms() {
        let terms = std::iter::once(1.0f64).chain(std::iter::repeat_n(1e-16, 10_000));
        let kahan: CompensatedSum<f64> = terms.clone().collect();
        let naive: f64 = terms.sum();
        assert_eq!(naive, 1.0);
        assert!((kahan.value() - (1.0 + 1e-12)).abs() < 1e-15);
    }
}
