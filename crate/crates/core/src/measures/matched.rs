//! A continuous measure with the same moments as `mu` up to homogeneous
//! degree 3.
//!
//! With `s = 1/2`, the level-1 draw is `m1 + R (Y - m1) + V` where `Y` is a
//! draw of `mu`, `R` is `1/s` with probability `s^3` and `0` otherwise, and
//! `V` is an independent symmetric box mixture with covariance
//! `(1 - s) Cov(Y)`. Then `E[R] = s^2`, `E[R^2] = s`, `E[R^3] = 1`, which fixes
//! the first three central moments. Level 2 is an affine function of the
//! centered level-1 draw with matching mean and cross-covariance, plus
//! centered box noise; higher levels are their mean plus box noise.

use num_traits::{One, Zero};

use super::{moments, unit_exps, MeasureSpec};
use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::scalar::{rational_approx, rational_to_f64, ratio, rint, Rational};

/// `L D L^T` of a symmetric positive semidefinite matrix, with `L` unit lower
/// triangular. Zero pivots leave the column of `L` as a unit vector.
pub fn ldl(a: &[Vec<Rational>]) -> Result<(Vec<Vec<Rational>>, Vec<Rational>)> {
    let n = a.len();
    let mut l = vec![vec![Rational::zero(); n]; n];
    let mut d = vec![Rational::zero(); n];
    for j in 0..n {
        let mut dj = a[j][j].clone();
        for k in 0..j {
            dj -= &l[j][k] * &l[j][k] * &d[k];
        }
        if dj < Rational::zero() {
            return Err(Error::SolverFailure {
                residual: rational_to_f64(&dj),
                reason: "covariance is not positive semidefinite".into(),
            });
        }
        d[j] = dj;
        l[j][j] = Rational::one();
        for i in j + 1..n {
            let mut v = a[i][j].clone();
            for k in 0..j {
                v -= &l[i][k] * &l[j][k] * &d[k];
            }
            if d[j].is_zero() {
                if !v.is_zero() {
                    return Err(Error::SolverFailure {
                        residual: rational_to_f64(&v),
                        reason: "covariance is not positive semidefinite".into(),
                    });
                }
            } else {
                l[i][j] = v / &d[j];
            }
        }
    }
    Ok((l, d))
}

/// A solution `x` of `L D L^T x = c`, using `D^+` on zero pivots; `None`
/// when `c` is not in the range.
fn ldl_solve(l: &[Vec<Rational>], d: &[Rational], c: &[Rational]) -> Option<Vec<Rational>> {
    let n = c.len();
    let mut y = c.to_vec();
    for i in 0..n {
        for k in 0..i {
            let t = &l[i][k] * &y[k];
            y[i] -= t;
        }
    }
    for i in 0..n {
        if d[i].is_zero() {
            if !y[i].is_zero() {
                return None;
            }
        } else {
            y[i] = &y[i] / &d[i];
        }
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            let t = &l[k][i] * &y[k];
            y[i] -= t;
        }
    }
    Some(y)
}

/// Symmetric two-box mixture on coordinate `c` of `R^q` with variance `v`.
fn latent(q: usize, c: usize, v: &Rational) -> MeasureSpec {
    let pinned = |h: Rational| MeasureSpec::BoxUniform {
        intervals: (0..q)
            .map(|i| if i == c { (-h.clone(), h.clone()) } else { (rint(0), rint(0)) })
            .collect(),
    };
    let t = rational_approx((3.0 * rational_to_f64(v)).sqrt(), 1 << 20);
    let three_v = rint(3) * v;
    let (h2, h1) = (&t / rint(2), &t * rint(2));
    let (a, b) = (&h2 * &h2, &h1 * &h1);
    let p = (&three_v - &a) / (&b - &a);
    if p.is_one() {
        return pinned(h1);
    }
    MeasureSpec::Mixture {
        components: vec![pinned(h2), pinned(h1)],
        weights: vec![Rational::one() - &p, p],
    }
}

fn is_fixed_point(mu: &MeasureSpec, algebra: &Algebra) -> bool {
    let d1 = algebra.basis().dim_of_level(1);
    match mu {
        MeasureSpec::BoxUniform { intervals } => intervals.iter().enumerate().all(|(c, (lo, hi))| {
            if c < d1 {
                lo < hi && (lo + hi).is_zero()
            } else {
                lo.is_zero() && hi.is_zero()
            }
        }),
        _ => false,
    }
}

pub fn matched_measure(mu: &MeasureSpec, algebra: &Algebra) -> Result<MeasureSpec> {
    mu.validate()?;
    let basis = algebra.basis();
    mu.check_dim(basis)?;
    if is_fixed_point(mu, algebra) {
        return Ok(mu.clone());
    }
    let q = basis.total_dim();
    let d1 = basis.dim_of_level(1);
    let s = ratio(1, 2);
    let first = |c: usize| mu.moment(&unit_exps(q, &[(c, 1)]));
    let second = |a: usize, b: usize| {
        if a == b {
            mu.moment(&unit_exps(q, &[(a, 2)]))
        } else {
            mu.moment(&unit_exps(q, &[(a, 1), (b, 1)]))
        }
    };
    let mean: Vec<Rational> = (0..q).map(first).collect();
    let cov: Vec<Vec<Rational>> = (0..d1)
        .map(|i| (0..d1).map(|j| second(i, j) - &mean[i] * &mean[j]).collect())
        .collect();
    let (l, d) = ldl(&cov)?;

    // scaled copy of mu, centered, level 1 only
    let mut shrink = vec![vec![rint(0); q]; q];
    for (i, row) in shrink.iter_mut().enumerate().take(d1) {
        row[i] = Rational::one() / &s;
    }
    let scaled = MeasureSpec::Affine {
        base: Box::new(mu.clone()),
        matrix: shrink,
        offset: (0..q)
            .map(|c| if c < d1 { -(&mean[c] / &s) } else { rint(0) })
            .collect(),
    };
    let s3 = &s * &s * &s;
    let mut parts = vec![MeasureSpec::Mixture {
        components: vec![scaled, MeasureSpec::point_mass(vec![rint(0); q])],
        weights: vec![s3.clone(), Rational::one() - s3],
    }];
    let latents: Vec<MeasureSpec> = (0..d1)
        .filter(|&i| !d[i].is_zero())
        .map(|i| latent(q, i, &((Rational::one() - &s) * &d[i])))
        .collect();
    if !latents.is_empty() {
        let mut lift = vec![vec![rint(0); q]; q];
        for i in 0..d1 {
            lift[i][..d1].clone_from_slice(&l[i]);
        }
        parts.push(MeasureSpec::Affine {
            base: Box::new(MeasureSpec::Sum { parts: latents }),
            matrix: lift,
            offset: vec![rint(0); q],
        });
    }
    if q > d1 {
        let h = ratio(1, 2);
        parts.push(MeasureSpec::BoxUniform {
            intervals: (0..q)
                .map(|c| if c < d1 { (rint(0), rint(0)) } else { (-h.clone(), h.clone()) })
                .collect(),
        });
    }

    // x = M u + mean with u the centered level-1 draw and higher-level noise
    let mut matrix = vec![vec![rint(0); q]; q];
    for (i, row) in matrix.iter_mut().enumerate() {
        row[i] = Rational::one();
    }
    if algebra.step() >= 2 {
        for k in basis.level_range(2) {
            let c: Vec<Rational> = (0..d1).map(|j| second(k, j) - &mean[k] * &mean[j]).collect();
            let beta = ldl_solve(&l, &d, &c).ok_or_else(|| Error::SolverFailure {
                residual: c.iter().map(|x| rational_to_f64(x).abs()).fold(0.0, f64::max),
                reason: format!("cross-covariance of coordinate {k} is outside the level-1 covariance range"),
            })?;
            matrix[k][..d1].clone_from_slice(&beta);
        }
    }
    let phi = MeasureSpec::Affine {
        base: Box::new(MeasureSpec::Sum { parts }),
        matrix,
        offset: mean,
    };
    phi.validate()?;

    let want = moments(mu, basis, 3)?;
    let got = moments(&phi, basis, 3)?;
    if let Some(diff) = got.max_difference(&want) {
        if !diff.is_zero() {
            return Err(Error::SolverFailure {
                residual: rational_to_f64(&diff),
                reason: "moments do not match".into(),
            });
        }
    }
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::measures::sublaplacian_coeffs;

    fn assert_matched(mu: &MeasureSpec, alg: &Algebra) -> MeasureSpec {
        let phi = matched_measure(mu, alg).unwrap();
        let a = moments(mu, alg.basis(), 3).unwrap();
        let b = moments(&phi, alg.basis(), 3).unwrap();
        assert_eq!(a, b);
        phi
    }

    #[test]
    fn box_is_fixed() {
        let alg = catalog::heisenberg3().algebra;
        let mu = MeasureSpec::centered_box(alg.basis(), ratio(1, 2));
        assert_eq!(matched_measure(&mu, &alg).unwrap(), mu);
    }

    #[test]
    fn discrete_measures() {
        let alg = catalog::heisenberg3().algebra;
        let phi = assert_matched(&MeasureSpec::rademacher(3, 0), &alg);
        assert!(phi.atoms().is_none());
        let three = MeasureSpec::uniform_atoms(vec![
            vec![rint(1), rint(0), rint(0)],
            vec![ratio(-1, 2), rint(1), ratio(1, 3)],
            vec![ratio(-1, 2), rint(-1), rint(0)],
        ])
        .unwrap();
        let phi = assert_matched(&three, &alg);
        assert_eq!(
            sublaplacian_coeffs(&three, &alg).unwrap(),
            sublaplacian_coeffs(&phi, &alg).unwrap()
        );
    }

    #[test]
    fn level2_mean_is_kept() {
        let alg = catalog::heisenberg3().algebra;
        let mu = MeasureSpec::BoxUniform {
            intervals: vec![
                (ratio(-1, 2), ratio(1, 2)),
                (ratio(-1, 2), ratio(1, 2)),
                (ratio(1, 4), ratio(1, 4)),
            ],
        };
        let phi = assert_matched(&mu, &alg);
        assert_eq!(phi.moment(&[0, 0, 1]), ratio(1, 4));
    }

    #[test]
    fn step3_and_uncentered() {
        let alg = catalog::ut4().algebra;
        let mut atoms = Vec::new();
        for i in 0..3 {
            let mut a = vec![rint(0); 6];
            a[i] = rint(1);
            a[3 + i % 2] = ratio(1, 2);
            a[5] = rint(i as i64);
            atoms.push(a);
        }
        let mu = MeasureSpec::uniform_atoms(atoms).unwrap();
        assert_matched(&mu, &alg);
    }

    #[test]
    fn ldl_reconstructs() {
        let a = vec![
            vec![rint(4), rint(2), rint(0)],
            vec![rint(2), rint(1), rint(0)],
            vec![rint(0), rint(0), ratio(1, 3)],
        ];
        let (l, d) = ldl(&a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: Rational = (0..3).map(|k| &l[i][k] * &d[k] * &l[j][k]).sum();
                assert_eq!(v, a[i][j]);
            }
        }
        assert!(d[1].is_zero());
        let x = ldl_solve(&l, &d, &[rint(2), rint(1), rint(1)]).unwrap();
        let back: Vec<Rational> = (0..3).map(|i| (0..3).map(|j| &a[i][j] * &x[j]).sum()).collect();
        assert_eq!(back, vec![rint(2), rint(1), rint(1)]);
        assert!(ldl_solve(&l, &d, &[rint(1), rint(1), rint(0)]).is_none());
    }
}
