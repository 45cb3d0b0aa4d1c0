//! Driving measures on exponential coordinates: exact moments,
//! characteristic functions and `f64` sampling.

pub mod cramer;
pub mod matched;
pub mod sampler;
pub mod sublaplacian;

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::GradedBasis;
use crate::error::{Error, Result};
use crate::scalar::{rational_to_f64, rint, serde_rational, Rational};

pub use cramer::{cramer_check, CramerReport, CramerVerdict};
pub use matched::matched_measure;
pub use sampler::Sampler;
pub use sublaplacian::{sublaplacian_coeffs, SubLaplacianCoefficients};

/// A probability measure on `R^q`, coordinates in basis order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum MeasureSpec {
    /// Finitely many atoms with positive weights summing to one.
    Discrete {
        #[serde(with = "serde_rational::matrix")]
        atoms: Vec<Vec<Rational>>,
        #[serde(with = "serde_rational::vec")]
        weights: Vec<Rational>,
    },
    /// Independent uniform coordinates; `lo == hi` pins a coordinate.
    BoxUniform {
        #[serde(with = "serde_rational::pairs")]
        intervals: Vec<(Rational, Rational)>,
    },
    /// Independent centered normal coordinates with the given variances.
    Gaussian {
        #[serde(with = "serde_rational::vec")]
        variances: Vec<Rational>,
    },
    Mixture {
        components: Vec<MeasureSpec>,
        #[serde(with = "serde_rational::vec")]
        weights: Vec<Rational>,
    },
    /// Law of the coordinatewise sum of independent draws.
    Sum { parts: Vec<MeasureSpec> },
    /// Law of `matrix * z + offset` for `z` drawn from `base`.
    Affine {
        base: Box<MeasureSpec>,
        #[serde(with = "serde_rational::matrix")]
        matrix: Vec<Vec<Rational>>,
        #[serde(with = "serde_rational::vec")]
        offset: Vec<Rational>,
    },
}

impl MeasureSpec {
    pub fn point_mass(at: Vec<Rational>) -> Self {
        MeasureSpec::Discrete {
            atoms: vec![at],
            weights: vec![Rational::one()],
        }
    }

    pub fn discrete(atoms: Vec<Vec<Rational>>, weights: Vec<Rational>) -> Result<Self> {
        let m = MeasureSpec::Discrete { atoms, weights };
        m.validate()?;
        Ok(m)
    }

    /// Equal-weight atoms.
    pub fn uniform_atoms(atoms: Vec<Vec<Rational>>) -> Result<Self> {
        let w = Rational::new(1.into(), (atoms.len() as i64).into());
        let n = atoms.len();
        Self::discrete(atoms, vec![w; n])
    }

    /// `+-e_c` with weight one half each, in dimension `q`.
    pub fn rademacher(q: usize, coord: usize) -> Self {
        let mut plus = vec![Rational::zero(); q];
        plus[coord] = Rational::one();
        let minus = plus.iter().map(|v| -v).collect();
        MeasureSpec::Discrete {
            atoms: vec![plus, minus],
            weights: vec![Rational::new(1.into(), 2.into()); 2],
        }
    }

    /// Uniform on `[-h, h]` in each level-1 coordinate, zero elsewhere.
    pub fn centered_box(basis: &GradedBasis, half_width: Rational) -> Self {
        let d1 = basis.dim_of_level(1);
        let intervals = (0..basis.total_dim())
            .map(|c| {
                if c < d1 {
                    (-half_width.clone(), half_width.clone())
                } else {
                    (Rational::zero(), Rational::zero())
                }
            })
            .collect();
        MeasureSpec::BoxUniform { intervals }
    }

    /// Standard normal in each level-1 coordinate, zero elsewhere.
    pub fn level1_gaussian(basis: &GradedBasis) -> Self {
        let d1 = basis.dim_of_level(1);
        MeasureSpec::Gaussian {
            variances: (0..basis.total_dim())
                .map(|c| if c < d1 { Rational::one() } else { Rational::zero() })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            MeasureSpec::Discrete { atoms, .. } => atoms.first().map_or(0, |a| a.len()),
            MeasureSpec::BoxUniform { intervals } => intervals.len(),
            MeasureSpec::Gaussian { variances } => variances.len(),
            MeasureSpec::Mixture { components, .. } => components.first().map_or(0, |c| c.dim()),
            MeasureSpec::Sum { parts } => parts.first().map_or(0, |p| p.dim()),
            MeasureSpec::Affine { matrix, .. } => matrix.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidMeasure(msg));
        let check_weights = |w: &[Rational], n: usize| -> Result<()> {
            if w.len() != n || n == 0 {
                return Err(Error::InvalidMeasure(format!("{} weights for {n} items", w.len())));
            }
            if w.iter().any(|x| !x.is_positive()) {
                return Err(Error::InvalidMeasure("weights must be positive".into()));
            }
            let total: Rational = w.iter().sum();
            if !total.is_one() {
                return Err(Error::InvalidMeasure(format!("weights sum to {total}")));
            }
            Ok(())
        };
        match self {
            MeasureSpec::Discrete { atoms, weights } => {
                check_weights(weights, atoms.len())?;
                let q = atoms[0].len();
                if atoms.iter().any(|a| a.len() != q) {
                    return bad("atoms of different lengths".into());
                }
            }
            MeasureSpec::BoxUniform { intervals } => {
                if intervals.iter().any(|(lo, hi)| lo > hi) {
                    return bad("interval with lo > hi".into());
                }
            }
            MeasureSpec::Gaussian { variances } => {
                if variances.iter().any(|v| v.is_negative()) {
                    return bad("negative variance".into());
                }
            }
            MeasureSpec::Mixture { components, weights } => {
                check_weights(weights, components.len())?;
                for c in components {
                    c.validate()?;
                }
                if components.iter().any(|c| c.dim() != components[0].dim()) {
                    return bad("mixture components of different dimension".into());
                }
            }
            MeasureSpec::Sum { parts } => {
                if parts.is_empty() {
                    return bad("empty sum".into());
                }
                for p in parts {
                    p.validate()?;
                }
                if parts.iter().any(|p| p.dim() != parts[0].dim()) {
                    return bad("summands of different dimension".into());
                }
            }
            MeasureSpec::Affine { base, matrix, offset } => {
                base.validate()?;
                if offset.len() != matrix.len() || matrix.iter().any(|r| r.len() != base.dim()) {
                    return bad("affine map shape does not match its base".into());
                }
            }
        }
        Ok(())
    }

    /// Exact raw moment `E[prod_c x_c^{exps_c}]`.
    pub fn moment(&self, exps: &[u32]) -> Rational {
        match self {
            MeasureSpec::Discrete { atoms, weights } => atoms
                .iter()
                .zip(weights)
                .map(|(a, w)| w * monomial_at(a, exps))
                .sum(),
            MeasureSpec::BoxUniform { intervals } => intervals
                .iter()
                .zip(exps)
                .map(|((lo, hi), e)| interval_moment(lo, hi, *e))
                .product(),
            MeasureSpec::Gaussian { variances } => variances
                .iter()
                .zip(exps)
                .map(|(v, e)| gaussian_moment(v, *e))
                .product(),
            MeasureSpec::Mixture { components, weights } => components
                .iter()
                .zip(weights)
                .map(|(c, w)| w * c.moment(exps))
                .sum(),
            MeasureSpec::Sum { parts } => sum_moment(parts, exps),
            MeasureSpec::Affine { base, matrix, offset } => {
                let poly = expand_affine_power(matrix, offset, exps);
                poly.iter().map(|(z, c)| c * base.moment(z)).sum()
            }
        }
    }

    pub fn mean(&self) -> Vec<Rational> {
        let q = self.dim();
        (0..q).map(|c| self.moment(&unit_exps(q, &[(c, 1)]))).collect()
    }

    /// `E[e(-xi . x)]` with `e(t) = exp(2 pi i t)`, over all coordinates.
    pub fn char_fn(&self, xi: &[f64]) -> Complex64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        match self {
            MeasureSpec::Discrete { atoms, weights } => atoms
                .iter()
                .zip(weights)
                .map(|(a, w)| {
                    let t: f64 = a.iter().zip(xi).map(|(x, f)| rational_to_f64(x) * f).sum();
                    Complex64::from_polar(rational_to_f64(w), -two_pi * t)
                })
                .sum(),
            MeasureSpec::BoxUniform { intervals } => intervals
                .iter()
                .zip(xi)
                .map(|((lo, hi), f)| {
                    let (lo, hi) = (rational_to_f64(lo), rational_to_f64(hi));
                    let center = 0.5 * (lo + hi);
                    Complex64::from_polar(sinc(std::f64::consts::PI * f * (hi - lo)), -two_pi * f * center)
                })
                .product(),
            MeasureSpec::Gaussian { variances } => {
                let s: f64 = variances.iter().zip(xi).map(|(v, f)| rational_to_f64(v) * f * f).sum();
                Complex64::new((-2.0 * std::f64::consts::PI.powi(2) * s).exp(), 0.0)
            }
            MeasureSpec::Mixture { components, weights } => components
                .iter()
                .zip(weights)
                .map(|(c, w)| c.char_fn(xi) * rational_to_f64(w))
                .sum(),
            MeasureSpec::Sum { parts } => parts.iter().map(|p| p.char_fn(xi)).product(),
            MeasureSpec::Affine { base, matrix, offset } => {
                let m = base.dim();
                let pulled: Vec<f64> = (0..m)
                    .map(|j| matrix.iter().zip(xi).map(|(row, f)| rational_to_f64(&row[j]) * f).sum())
                    .collect();
                let shift: f64 = offset.iter().zip(xi).map(|(b, f)| rational_to_f64(b) * f).sum();
                base.char_fn(&pulled) * Complex64::from_polar(1.0, -two_pi * shift)
            }
        }
    }

    /// Characteristic function of the level-1 projection.
    pub fn abelian_char_fn(&self, basis: &GradedBasis, xi1: &[f64]) -> Result<Complex64> {
        let d1 = basis.dim_of_level(1);
        if xi1.len() != d1 {
            return Err(Error::DimensionMismatch {
                expected: d1,
                found: xi1.len(),
            });
        }
        self.check_dim(basis)?;
        let mut xi = vec![0.0; basis.total_dim()];
        xi[..d1].copy_from_slice(xi1);
        Ok(self.char_fn(&xi))
    }

    pub fn check_dim(&self, basis: &GradedBasis) -> Result<()> {
        if self.dim() != basis.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.total_dim(),
                found: self.dim(),
            });
        }
        Ok(())
    }

    pub fn sampler(&self) -> Result<Sampler> {
        self.validate()?;
        Sampler::new(self)
    }

    /// Atoms and weights when the measure is finitely supported.
    pub fn atoms(&self) -> Option<(Vec<Vec<Rational>>, Vec<Rational>)> {
        match self {
            MeasureSpec::Discrete { atoms, weights } => Some((atoms.clone(), weights.clone())),
            MeasureSpec::Mixture { components, weights } => {
                let mut a = Vec::new();
                let mut w = Vec::new();
                for (c, cw) in components.iter().zip(weights) {
                    let (ca, cws) = c.atoms()?;
                    a.extend(ca);
                    w.extend(cws.into_iter().map(|x| x * cw));
                }
                Some((a, w))
            }
            _ => None,
        }
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn monomial_at(point: &[Rational], exps: &[u32]) -> Rational {
    point
        .iter()
        .zip(exps)
        .filter(|(_, e)| **e > 0)
        .map(|(x, e)| num_traits::pow(x.clone(), *e as usize))
        .product()
}

/// `E[U^e]` for `U` uniform on `[lo, hi]` (a point mass when `lo == hi`).
pub fn interval_moment(lo: &Rational, hi: &Rational, e: u32) -> Rational {
    if e == 0 {
        return Rational::one();
    }
    if lo == hi {
        return num_traits::pow(lo.clone(), e as usize);
    }
    let k = e as usize + 1;
    (num_traits::pow(hi.clone(), k) - num_traits::pow(lo.clone(), k)) / (rint(k as i64) * (hi - lo))
}

/// `E[Z^e]` for `Z ~ N(0, v)`.
pub fn gaussian_moment(v: &Rational, e: u32) -> Rational {
    if e % 2 == 1 {
        return Rational::zero();
    }
    let double_fact: i64 = (1..e as i64).step_by(2).product();
    num_traits::pow(v.clone(), (e / 2) as usize) * rint(double_fact.max(1))
}

fn binom(n: u32, k: u32) -> Rational {
    let mut r = Rational::one();
    for i in 0..k {
        r = r * rint((n - i) as i64) / rint(i as i64 + 1);
    }
    r
}

fn sum_moment(parts: &[MeasureSpec], exps: &[u32]) -> Rational {
    if parts.len() == 1 {
        return parts[0].moment(exps);
    }
    let (first, rest) = (&parts[0], &parts[1..]);
    let mut total = Rational::zero();
    let mut a = vec![0u32; exps.len()];
    loop {
        let b: Vec<u32> = exps.iter().zip(&a).map(|(e, x)| e - x).collect();
        let coef: Rational = exps.iter().zip(&a).map(|(e, x)| binom(*e, *x)).product();
        let m1 = first.moment(&a);
        if !m1.is_zero() {
            total += coef * m1 * sum_moment(rest, &b);
        }
        // next a <= exps
        let mut i = 0;
        loop {
            if i == a.len() {
                return total;
            }
            if a[i] < exps[i] {
                a[i] += 1;
                break;
            }
            a[i] = 0;
            i += 1;
        }
    }
}

/// `prod_c (offset_c + sum_j matrix_cj z_j)^{exps_c}` as a map from
/// exponent vectors in `z` to coefficients.
fn expand_affine_power(
    matrix: &[Vec<Rational>],
    offset: &[Rational],
    exps: &[u32],
) -> BTreeMap<Vec<u32>, Rational> {
    let m = matrix.first().map_or(0, |r| r.len());
    let mut poly: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
    poly.insert(vec![0; m], Rational::one());
    for (c, &e) in exps.iter().enumerate() {
        for _ in 0..e {
            let mut next: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
            for (z, coef) in &poly {
                if !offset[c].is_zero() {
                    *next.entry(z.clone()).or_insert_with(Rational::zero) += coef * &offset[c];
                }
                for (j, a) in matrix[c].iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    let mut z2 = z.clone();
                    z2[j] += 1;
                    *next.entry(z2).or_insert_with(Rational::zero) += coef * a;
                }
            }
            next.retain(|_, v| !v.is_zero());
            poly = next;
        }
    }
    poly
}

/// Exponent vector of length `q` with the listed entries set.
pub fn unit_exps(q: usize, entries: &[(usize, u32)]) -> Vec<u32> {
    let mut e = vec![0u32; q];
    for (c, k) in entries {
        e[*c] += k;
    }
    e
}

/// Raw moments of all monomials of homogeneous degree at most `degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub degree: usize,
    pub entries: BTreeMap<Vec<u32>, Rational>,
}

impl MomentTable {
    pub fn get(&self, exps: &[u32]) -> Option<&Rational> {
        self.entries.get(exps)
    }

    /// Largest absolute entrywise difference.
    pub fn max_difference(&self, other: &MomentTable) -> Option<Rational> {
        if self.entries.len() != other.entries.len() {
            return None;
        }
        self.entries
            .iter()
            .map(|(k, v)| other.entries.get(k).map(|w| (v - w).abs()))
            .try_fold(Rational::zero(), |acc, d| d.map(|d| if d > acc { d } else { acc }))
    }
}

/// Every exponent vector with `sum_c level_c e_c <= degree`.
pub fn homogeneous_exponents(basis: &GradedBasis, degree: usize) -> Vec<Vec<u32>> {
    let q = basis.total_dim();
    let levels: Vec<usize> = (0..q).map(|c| basis.level_of(c)).collect();
    let mut out = Vec::new();
    let mut cur = vec![0u32; q];
    fn rec(c: usize, budget: usize, levels: &[usize], cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if c == levels.len() {
            out.push(cur.clone());
            return;
        }
        let mut e = 0;
        while e * levels[c] <= budget {
            cur[c] = e as u32;
            rec(c + 1, budget - e * levels[c], levels, cur, out);
            e += 1;
        }
        cur[c] = 0;
    }
    rec(0, degree, &levels, &mut cur, &mut out);
    out
}

pub fn moments(mu: &MeasureSpec, basis: &GradedBasis, degree: usize) -> Result<MomentTable> {
    mu.validate()?;
    mu.check_dim(basis)?;
    let entries = homogeneous_exponents(basis, degree)
        .into_iter()
        .map(|e| {
            let m = mu.moment(&e);
            (e, m)
        })
        .collect();
    Ok(MomentTable { degree, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::scalar::ratio;

    fn heis() -> GradedBasis {
        catalog::heisenberg3().algebra.basis().clone()
    }

    #[test]
    fn uniform_moments() {
        let (lo, hi) = (ratio(-1, 2), ratio(1, 2));
        assert_eq!(interval_moment(&lo, &hi, 1), rint(0));
        assert_eq!(interval_moment(&lo, &hi, 2), ratio(1, 12));
        assert_eq!(interval_moment(&lo, &hi, 4), ratio(1, 80));
        assert_eq!(gaussian_moment(&rint(2), 4), rint(12));
    }

    #[test]
    fn discrete_and_mixture_moments() {
        let r = MeasureSpec::rademacher(3, 0);
        assert_eq!(r.moment(&[1, 0, 0]), rint(0));
        assert_eq!(r.moment(&[2, 0, 0]), rint(1));
        let m = MeasureSpec::Mixture {
            components: vec![
                MeasureSpec::point_mass(vec![rint(2), rint(0), rint(0)]),
                MeasureSpec::point_mass(vec![rint(-6), rint(0), rint(0)]),
            ],
            weights: vec![ratio(3, 4), ratio(1, 4)],
        };
        m.validate().unwrap();
        assert_eq!(m.moment(&[1, 0, 0]), rint(0));
        assert_eq!(m.moment(&[2, 0, 0]), rint(12));
    }

    #[test]
    fn sum_and_affine_moments() {
        let b = MeasureSpec::centered_box(&heis(), ratio(1, 2));
        let g = MeasureSpec::level1_gaussian(&heis());
        let s = MeasureSpec::Sum { parts: vec![b.clone(), g] };
        // Var adds, fourth moment: E(U+Z)^4 = EU^4 + 6 EU^2 EZ^2 + EZ^4
        assert_eq!(s.moment(&[2, 0, 0]), ratio(1, 12) + rint(1));
        assert_eq!(s.moment(&[4, 0, 0]), ratio(1, 80) + ratio(6, 12) + rint(3));
        // (u, u, 1)
        let a = MeasureSpec::Affine {
            base: Box::new(b),
            matrix: vec![
                vec![rint(1), rint(0), rint(0)],
                vec![rint(1), rint(0), rint(0)],
                vec![rint(0), rint(0), rint(0)],
            ],
            offset: vec![rint(0), rint(0), rint(1)],
        };
        a.validate().unwrap();
        assert_eq!(a.moment(&[1, 1, 0]), ratio(1, 12));
        assert_eq!(a.moment(&[0, 0, 3]), rint(1));
        assert_eq!(a.moment(&[2, 1, 1]), rint(0));
    }

    #[test]
    fn char_fn_examples() {
        let b = heis();
        let bx = MeasureSpec::centered_box(&b, ratio(1, 2));
        assert!((bx.abelian_char_fn(&b, &[0.0, 0.0]).unwrap() - 1.0).norm() < 1e-15);
        assert!(bx.abelian_char_fn(&b, &[1.0, 0.0]).unwrap().norm() < 1e-15);
        let r = MeasureSpec::rademacher(3, 0);
        let v = r.abelian_char_fn(&b, &[0.5, 0.0]).unwrap();
        assert!((v - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        let g = MeasureSpec::level1_gaussian(&b);
        let v = g.abelian_char_fn(&b, &[1.0, 0.0]).unwrap();
        assert!((v.re - (-2.0 * std::f64::consts::PI.powi(2)).exp()).abs() < 1e-20);
        assert!(r.abelian_char_fn(&b, &[1.0]).is_err());
    }

    #[test]
    fn table_has_expected_entries() {
        let b = heis();
        let e = homogeneous_exponents(&b, 3);
        // level-1 monomials of degree <= 3 in two variables: 10; times x3 (deg 2) with
        // level-1 of degree <= 1: 3
        assert_eq!(e.len(), 13);
        let t = moments(&MeasureSpec::centered_box(&b, ratio(1, 2)), &b, 3).unwrap();
        assert_eq!(t.get(&[0, 0, 0]), Some(&rint(1)));
        assert_eq!(t.get(&[2, 0, 0]), Some(&ratio(1, 12)));
    }

    #[test]
    fn json_round_trip() {
        let m = MeasureSpec::Mixture {
            components: vec![MeasureSpec::rademacher(3, 1), MeasureSpec::centered_box(&heis(), ratio(1, 3))],
            weights: vec![ratio(1, 4), ratio(3, 4)],
        };
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("\"variant\":\"mixture\""));
        let back: MeasureSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        let parsed: MeasureSpec = serde_json::from_str(
            r#"{"variant":"discrete","atoms":[[1,0,0],[-1,0,0]],"weights":["1/2",0.5]}"#,
        )
        .unwrap();
        assert_eq!(parsed, MeasureSpec::rademacher(3, 0));
        let bad = MeasureSpec::Discrete {
            atoms: vec![vec![rint(0)]],
            weights: vec![ratio(1, 2)],
        };
        assert!(bad.validate().is_err());
    }
}
