//! Coefficients of the sub-Laplacian attached to a centered measure.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{unit_exps, MeasureSpec};
use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::scalar::{rational_to_f64, ratio, serde_rational, Rational};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubLaplacianCoefficients {
    /// `a_ij = E[x^{(1,i)} x^{(1,j)}] / 2`.
    #[serde(with = "serde_rational::matrix")]
    pub a: Vec<Vec<Rational>>,
    /// `b_i = E[x^{(2,i)}]`.
    #[serde(with = "serde_rational::vec")]
    pub b: Vec<Rational>,
    /// `b_i - 1/2 sum_{j<k} a_jk pr_{2,i}[X_{1,j}, X_{1,k}]`.
    #[serde(with = "serde_rational::vec")]
    pub a_drift: Vec<Rational>,
}

impl SubLaplacianCoefficients {
    pub fn max_difference(&self, other: &Self) -> f64 {
        let pairs = self
            .a
            .iter()
            .flatten()
            .zip(other.a.iter().flatten())
            .chain(self.b.iter().zip(&other.b))
            .chain(self.a_drift.iter().zip(&other.a_drift));
        pairs.map(|(x, y)| rational_to_f64(&(x - y).abs())).fold(0.0, f64::max)
    }
}

/// Reject measures whose level-1 projection has nonzero mean.
pub fn check_centered(mu: &MeasureSpec, algebra: &Algebra) -> Result<()> {
    let q = algebra.dim();
    let d1 = algebra.basis().dim_of_level(1);
    let mean: Vec<Rational> = (0..d1).map(|c| mu.moment(&unit_exps(q, &[(c, 1)]))).collect();
    if mean.iter().any(|m| !m.is_zero()) {
        return Err(Error::NotCentered(mean.iter().map(rational_to_f64).collect()));
    }
    Ok(())
}

pub fn sublaplacian_coeffs(mu: &MeasureSpec, algebra: &Algebra) -> Result<SubLaplacianCoefficients> {
    mu.validate()?;
    mu.check_dim(algebra.basis())?;
    check_centered(mu, algebra)?;
    let basis = algebra.basis();
    let q = basis.total_dim();
    let d1 = basis.dim_of_level(1);
    let level2 = if algebra.step() >= 2 { basis.level_range(2) } else { 0..0 };
    let half = ratio(1, 2);
    let a: Vec<Vec<Rational>> = (0..d1)
        .map(|i| {
            (0..d1)
                .map(|j| &half * mu.moment(&unit_exps(q, &[(i, 1), (j, 1)])))
                .collect()
        })
        .collect();
    let b: Vec<Rational> = level2.clone().map(|c| mu.moment(&unit_exps(q, &[(c, 1)]))).collect();
    let a_drift = level2
        .clone()
        .enumerate()
        .map(|(i, pos)| {
            let mut correction = Rational::zero();
            for j in 0..d1 {
                for k in j + 1..d1 {
                    let pr = algebra
                        .constants()
                        .get(j, k)
                        .iter()
                        .find(|(c, _)| *c == pos)
                        .map(|(_, v)| v.clone())
                        .unwrap_or_else(Rational::zero);
                    correction += &a[j][k] * pr;
                }
            }
            &b[i] - &half * correction
        })
        .collect();
    Ok(SubLaplacianCoefficients { a, b, a_drift })
}
