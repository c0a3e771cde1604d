//! Neumaier compensated summation, real and complex.
//!
//! Long reductions (prime sums, zero sums, Monte Carlo accumulators) are
//! collected sequentially through these accumulators so that results are
//! deterministic and the rounding error stays O(1) ulp instead of O(N).

use num_complex::Complex64;

/// Compensated accumulator for `f64`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for Neumaier {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Neumaier::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated accumulator for `Complex64` (componentwise Neumaier).
#[derive(Debug, Clone, Copy, Default)]
pub struct CNeumaier {
    re: Neumaier,
    im: Neumaier,
}

impl CNeumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: Complex64) {
        self.re.add(value.re);
        self.im.add(value.im);
    }

    #[inline]
    pub fn total(&self) -> Complex64 {
        Complex64::new(self.re.total(), self.im.total())
    }
}

/// Sum a slice with compensation.
pub fn sum_compensated(values: &[f64]) -> f64 {
    values.iter().copied().collect::<Neumaier>().total()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_beats_naive() {
        // 1 + 1e16 - 1e16 styled cancellation
        let mut acc = Neumaier::new();
        acc.add(1.0);
        acc.add(1e16);
        acc.add(-1e16);
        assert_eq!(acc.total(), 1.0);
    }

    #[test]
    fn many_small_terms() {
        let mut acc = Neumaier::new();
        for _ in 0..10_000_000 {
            acc.add(0.1);
        }
        assert!((acc.total() - 1e6).abs() < 1e-7);
    }
}
