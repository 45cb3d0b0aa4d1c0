//! Compactly supported Lipschitz test functions on `R^q`, optionally
//! smoothed by a bump kernel `sigma_t`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `int_{-1}^{1} exp(-1 / (1 - u^2)) du`.
pub const BUMP_INTEGRAL: f64 = 0.443_993_816_168_079_4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestFunctionKind {
    /// `prod_c max(0, 1 - 2|x_c| / B)`.
    ProductTent,
    /// `prod_c e * psi(2 x_c / B)` with `psi(u) = exp(-1 / (1 - u^2))`.
    SmoothBump,
    /// Product of trapezoids: 1 on `|x_c| <= B/4`, linear down to 0 at `B/2`.
    SmoothedIndicator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionSpec {
    pub kind: TestFunctionKind,
    /// Side `B` of the support box `[-B/2, B/2]^q`.
    pub support: f64,
    /// Fixed smoothing scale `t`; the function becomes `f * sigma_t`.
    #[serde(default)]
    pub smoothing: Option<f64>,
    /// Use `t = N^{(D+1)/2} / ||f||_1` for each walk length.
    #[serde(default)]
    pub couple_smoothing: bool,
}

fn psi(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

impl TestFunctionSpec {
    pub fn new(kind: TestFunctionKind, support: f64) -> Self {
        TestFunctionSpec {
            kind,
            support,
            smoothing: None,
            couple_smoothing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.support.is_finite() && self.support > 0.0) {
            return Err(Error::InvalidConfig("test function support must be positive".into()));
        }
        if let Some(t) = self.smoothing {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidConfig("smoothing scale must be positive".into()));
            }
        }
        Ok(())
    }

    fn factor(&self, v: f64) -> f64 {
        let h = 0.5 * self.support;
        match self.kind {
            TestFunctionKind::ProductTent => (1.0 - v.abs() / h).max(0.0),
            TestFunctionKind::SmoothBump => std::f64::consts::E * psi(v / h),
            TestFunctionKind::SmoothedIndicator => ((h - v.abs()) / (0.5 * h)).clamp(0.0, 1.0),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut p = 1.0;
        for v in x {
            p *= self.factor(*v);
            if p == 0.0 {
                break;
            }
        }
        p
    }

    pub fn sup_norm(&self) -> f64 {
        1.0
    }

    pub fn l1_norm(&self, q: usize) -> f64 {
        let h = 0.5 * self.support;
        let one = match self.kind {
            TestFunctionKind::ProductTent => h,
            TestFunctionKind::SmoothBump => h * std::f64::consts::E * BUMP_INTEGRAL,
            TestFunctionKind::SmoothedIndicator => 1.5 * h,
        };
        one.powi(q as i32)
    }

    /// Lipschitz constant for the Euclidean norm.
    pub fn lipschitz(&self, q: usize) -> f64 {
        let h = 0.5 * self.support;
        let one = match self.kind {
            TestFunctionKind::ProductTent => 1.0 / h,
            TestFunctionKind::SmoothBump => {
                let slope = (1..20_000)
                    .map(|i| {
                        let u = i as f64 / 20_000.0;
                        psi(u) * 2.0 * u / (1.0 - u * u).powi(2)
                    })
                    .fold(0.0, f64::max);
                std::f64::consts::E * slope / h
            }
            TestFunctionKind::SmoothedIndicator => 2.0 / h,
        };
        (q as f64).sqrt() * one
    }

    /// Smoothing scale in force for walk length `n` on a group of homogeneous
    /// dimension `d_hom`.
    pub fn smoothing_scale(&self, q: usize, n: usize, d_hom: usize) -> Option<f64> {
        if self.couple_smoothing {
            Some((n as f64).powf((d_hom as f64 + 1.0) / 2.0) / self.l1_norm(q))
        } else {
            self.smoothing
        }
    }
}

/// One draw from the normalized product bump `sigma` on `[-1, 1]^q`, by
/// rejection, written into `out`.
pub fn sample_bump<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    let top = (-1.0f64).exp();
    for o in out.iter_mut() {
        loop {
            let u = 2.0 * rng.random::<f64>() - 1.0;
            if rng.random::<f64>() * top <= psi(u) {
                *o = u;
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn riemann(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
    }

    #[test]
    fn norms_match_quadrature() {
        assert!((riemann(psi, -1.0, 1.0, 200_000) - BUMP_INTEGRAL).abs() < 1e-10);
        for kind in [
            TestFunctionKind::ProductTent,
            TestFunctionKind::SmoothBump,
            TestFunctionKind::SmoothedIndicator,
        ] {
            let f = TestFunctionSpec::new(kind, 3.0);
            let one = riemann(|v| f.eval(&[v]), -1.5, 1.5, 300_000);
            assert!((one - f.l1_norm(1)).abs() < 1e-8, "{kind:?}");
            assert!((f.l1_norm(2) - one * one).abs() < 1e-7);
            // finite-difference slope bounded by the Lipschitz constant
            let l = f.lipschitz(1);
            let worst = (0..3000)
                .map(|i| {
                    let v = -1.5 + i as f64 * 1e-3;
                    (f.eval(&[v + 1e-3]) - f.eval(&[v])).abs() / 1e-3
                })
                .fold(0.0, f64::max);
            assert!(worst <= l * (1.0 + 1e-6), "{kind:?} {worst} {l}");
            assert!(worst >= 0.99 * l, "{kind:?} {worst} {l}");
        }
    }

    #[test]
    fn support_and_peak() {
        let f = TestFunctionSpec::new(TestFunctionKind::ProductTent, 4.0);
        assert_eq!(f.eval(&[0.0, 0.0, 0.0]), 1.0);
        assert_eq!(f.eval(&[1.0, 0.0, -1.0]), 0.25);
        assert_eq!(f.eval(&[2.0, 0.0, 0.0]), 0.0);
        let b = TestFunctionSpec::new(TestFunctionKind::SmoothBump, 4.0);
        assert!((b.eval(&[0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bump_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut v = [0.0; 2];
        let mut m2 = 0.0;
        let n = 100_000;
        for _ in 0..n {
            sample_bump(&mut rng, &mut v);
            assert!(v.iter().all(|x| x.abs() < 1.0));
            m2 += v[0] * v[0];
        }
        let exact = riemann(|u| u * u * psi(u), -1.0, 1.0, 200_000) / BUMP_INTEGRAL;
        assert!((m2 / n as f64 - exact).abs() < 0.005);
    }
}
