//! Running means with standard errors and the parallel merge law.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Count, mean and centered sum of squares (Welford within a chunk, Chan
/// across chunks).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accumulator {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, other: &Accumulator) -> Accumulator {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let n = self.count + other.count;
        let (na, nb) = (self.count as f64, other.count as f64);
        let d = other.mean - self.mean;
        let mean = if na >= nb {
            self.mean + d * nb / n as f64
        } else {
            other.mean - d * na / n as f64
        };
        Accumulator {
            count: n,
            mean,
            m2: self.m2 + other.m2 + d * d * na * nb / n as f64,
        }
    }

    /// Sample variance with the `n - 1` denominator.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            return f64::INFINITY;
        }
        (self.variance() / self.count as f64).sqrt()
    }

    pub fn estimate(&self, seed: u64) -> EstimateWithError {
        EstimateWithError {
            mean: self.mean,
            std_error: self.std_error(),
            samples: self.count,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

impl EstimateWithError {
    /// An exactly known value.
    pub fn exact(mean: f64, seed: u64) -> Self {
        EstimateWithError {
            mean,
            std_error: 0.0,
            samples: 0,
            seed,
        }
    }

    /// `|a - b|` with independent errors added in quadrature.
    pub fn abs_difference(&self, other: &Self) -> EstimateWithError {
        EstimateWithError {
            mean: (self.mean - other.mean).abs(),
            std_error: self.std_error.hypot(other.std_error),
            samples: self.samples + other.samples,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexEstimate {
    pub re: EstimateWithError,
    pub im: EstimateWithError,
}

impl ComplexEstimate {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.mean, self.im.mean)
    }

    pub fn std_error(&self) -> f64 {
        self.re.std_error.hypot(self.im.std_error)
    }

    pub fn exact(z: Complex64, seed: u64) -> Self {
        ComplexEstimate {
            re: EstimateWithError::exact(z.re, seed),
            im: EstimateWithError::exact(z.im, seed),
        }
    }

    /// `|a - b|` with a first-order error.
    pub fn abs_difference(&self, other: &Self) -> EstimateWithError {
        let d = self.value() - other.value();
        EstimateWithError {
            mean: d.norm(),
            std_error: self.std_error().hypot(other.std_error()),
            samples: self.re.samples + other.re.samples,
            seed: self.re.seed,
        }
    }
}
