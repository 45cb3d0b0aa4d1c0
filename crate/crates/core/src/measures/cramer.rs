//! Numerical check of the Cramér condition for the level-1 projection.
//!
//! The supremum of `|mu_ab^(xi)|` is scanned on spherical shells, the
//! largest grid values are refined locally, and finitely supported measures
//! are additionally tested for a lattice structure, which yields an exact
//! frequency of modulus one.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::MeasureSpec;
use crate::algebra::GradedBasis;
use crate::error::{Error, Result};
use crate::oracle::invert;
use crate::scalar::{rational_to_f64, rint, Rational};

/// Grid supremum above which, absent an exact witness, no verdict is given.
pub const INCONCLUSIVE_THRESHOLD: f64 = 1.0 - 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellSup {
    pub r_lo: f64,
    pub r_hi: f64,
    pub sup: f64,
    pub argmax: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CramerVerdict {
    Satisfies { margin: f64 },
    Fails { witness: Vec<f64>, modulus: f64, exact: bool },
    Inconclusive { sup: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CramerReport {
    pub r_min: f64,
    pub r_max: f64,
    pub density: f64,
    pub shells: Vec<ShellSup>,
    pub sup: f64,
    pub verdict: CramerVerdict,
}

impl CramerReport {
    /// Supremum over all scanned shells lying outside radius `r`.
    pub fn exterior_sup(&self, r: f64) -> f64 {
        self.shells
            .iter()
            .filter(|s| s.r_lo >= r - 1e-12)
            .map(|s| s.sup)
            .fold(0.0, f64::max)
    }
}

/// Deterministic, roughly uniform directions on the unit sphere in `R^d`.
pub fn sphere_directions(d: usize, count: usize) -> Vec<Vec<f64>> {
    match d {
        0 => vec![],
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count.max(4))
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / count.max(4) as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let n = count.max(8);
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * i as f64;
                    vec![r * t.cos(), r * t.sin(), z]
                })
                .collect()
        }
        _ => {
            // Halton points pushed through the normal quantile, normalized
            let normal = Normal::new(0.0, 1.0).unwrap();
            let primes = [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
            (1..=count.max(2 * d))
                .map(|i| {
                    let v: Vec<f64> = (0..d)
                        .map(|c| normal.inverse_cdf(radical_inverse(i as u64, primes[c % primes.len()])))
                        .collect();
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.into_iter().map(|x| x / n).collect()
                })
                .collect()
        }
    }
}

/// Van der Corput radical inverse of `i` in `base`.
pub fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    out
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Scan `r_min <= ||xi|| <= r_max` with `density` radial steps per unit
/// radius and angular spacing about `1 / density`.
pub fn cramer_check(
    mu: &MeasureSpec,
    basis: &GradedBasis,
    r_min: f64,
    r_max: f64,
    density: f64,
) -> Result<CramerReport> {
    if !(r_min > 0.0) || r_max < r_min || !(density > 0.0) {
        return Err(Error::InvalidConfig("need 0 < r_min <= r_max and density > 0".into()));
    }
    mu.validate()?;
    mu.check_dim(basis)?;
    let d = basis.dim_of_level(1);
    let modulus = |xi: &[f64]| mu.abelian_char_fn(basis, xi).map(|c| c.norm()).unwrap_or(1.0);
    let steps = ((r_max - r_min) * density).ceil().max(1.0) as usize;
    let radii: Vec<f64> = (0..=steps)
        .map(|i| r_min + (r_max - r_min) * i as f64 / steps as f64)
        .collect();

    let mut shells = Vec::with_capacity(steps);
    for w in radii.windows(2) {
        let mut best = (-1.0, vec![0.0; d]);
        for &r in w {
            let count = ((2.0 * std::f64::consts::PI * r * density).ceil() as usize)
                .pow(d.saturating_sub(1) as u32)
                .clamp(8, 20_000);
            for dir in sphere_directions(d, count) {
                let xi: Vec<f64> = dir.iter().map(|x| x * r).collect();
                let m = modulus(&xi);
                if m > best.0 {
                    best = (m, xi);
                }
            }
        }
        shells.push(ShellSup {
            r_lo: w[0],
            r_hi: w[1],
            sup: best.0,
            argmax: best.1,
        });
    }

    // refine around the largest grid values, staying inside the annulus
    let mut order: Vec<usize> = (0..shells.len()).collect();
    order.sort_by(|a, b| shells[*b].sup.total_cmp(&shells[*a].sup));
    for &i in order.iter().take(5) {
        let (mut val, mut xi) = (shells[i].sup, shells[i].argmax.clone());
        let mut step = 0.5 / density;
        while step > 1e-9 {
            let mut improved = false;
            for c in 0..d {
                for sgn in [-1.0, 1.0] {
                    let mut cand = xi.clone();
                    cand[c] += sgn * step;
                    let n = norm(&cand);
                    if n < r_min {
                        cand.iter_mut().for_each(|x| *x *= r_min / n);
                    } else if n > r_max {
                        cand.iter_mut().for_each(|x| *x *= r_max / n);
                    }
                    let m = modulus(&cand);
                    if m > val {
                        val = m;
                        xi = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        let r = norm(&xi);
        if let Some(s) = shells.iter_mut().find(|s| r >= s.r_lo - 1e-12 && r <= s.r_hi + 1e-12) {
            if val > s.sup {
                s.sup = val;
                s.argmax = xi;
            }
        }
    }
    let sup = shells.iter().map(|s| s.sup).fold(0.0, f64::max);

    let lattice = mu
        .atoms()
        .and_then(|(atoms, _)| lattice_witness(&atoms, d, r_min));
    let verdict = if let Some(w) = lattice {
        let m = modulus(&w);
        CramerVerdict::Fails {
            witness: w,
            modulus: m,
            exact: true,
        }
    } else if sup > INCONCLUSIVE_THRESHOLD {
        CramerVerdict::Inconclusive { sup }
    } else {
        CramerVerdict::Satisfies { margin: 1.0 - sup }
    };
    Ok(CramerReport {
        r_min,
        r_max,
        density,
        shells,
        sup,
        verdict,
    })
}

/// Row basis of the integer lattice spanned by `rows`.
pub fn lattice_basis(mut rows: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut basis = Vec::new();
    for c in 0..cols {
        // Euclid on column c among remaining rows
        loop {
            let nz: Vec<usize> = (0..rows.len()).filter(|&i| !rows[i][c].is_zero()).collect();
            if nz.len() <= 1 {
                break;
            }
            let p = *nz.iter().min_by_key(|&&i| rows[i][c].abs()).unwrap();
            let pivot = rows[p].clone();
            for &i in &nz {
                if i != p {
                    let f = rows[i][c].div_floor(&pivot[c]);
                    for (x, y) in rows[i].iter_mut().zip(&pivot) {
                        *x -= &f * y;
                    }
                }
            }
        }
        if let Some(p) = (0..rows.len()).find(|&i| !rows[i][c].is_zero()) {
            basis.push(rows.remove(p));
        }
    }
    basis
}

/// A frequency of norm greater than `r_min` at which the characteristic
/// function of the level-1 atoms has modulus one, if the atoms lie on a
/// translated lattice (always true for rational atoms). The witness lies in
/// the span of the atom differences when that span is nonzero.
pub fn lattice_witness(atoms: &[Vec<Rational>], d: usize, r_min: f64) -> Option<Vec<f64>> {
    let pts: Vec<Vec<Rational>> = atoms.iter().map(|a| a[..d].to_vec()).collect();
    let diffs: Vec<Vec<Rational>> = pts[1..]
        .iter()
        .map(|p| p.iter().zip(&pts[0]).map(|(a, b)| a - b).collect())
        .filter(|v: &Vec<Rational>| v.iter().any(|x| !x.is_zero()))
        .collect();
    if diffs.is_empty() {
        let mut w = vec![0.0; d];
        w[0] = r_min.floor() + 1.0;
        return Some(w);
    }
    let den = diffs
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let int_rows: Vec<Vec<BigInt>> = diffs
        .iter()
        .map(|r| r.iter().map(|x| (x * Rational::from_integer(den.clone())).to_integer()).collect())
        .collect();
    let basis: Vec<Vec<Rational>> = lattice_basis(int_rows)
        .into_iter()
        .map(|r| {
            r.into_iter()
                .map(|x| Rational::new(x, den.clone()))
                .collect()
        })
        .collect();
    let rk = basis.len();
    // dual basis within the span: (B B^T)^{-1} B
    let gram: Vec<Vec<Rational>> = (0..rk)
        .map(|i| {
            (0..rk)
                .map(|j| basis[i].iter().zip(&basis[j]).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    let ginv = invert(gram)?;
    let dual: Vec<Vec<Rational>> = (0..rk)
        .map(|i| {
            (0..d)
                .map(|c| (0..rk).map(|j| &ginv[i][j] * &basis[j][c]).sum())
                .collect()
        })
        .collect();
    // shortest multiple of a small dual combination that leaves the ball
    let mut best: Option<(f64, Vec<f64>)> = None;
    let range = if rk <= 3 { 3i64 } else { 1 };
    let mut coef = vec![-range; rk];
    loop {
        if coef.iter().any(|c| *c != 0) {
            let v: Vec<Rational> = (0..d)
                .map(|c| (0..rk).map(|i| rint(coef[i]) * &dual[i][c]).sum())
                .collect();
            let positive = v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_positive());
            if positive {
                let v: Vec<f64> = v.iter().map(rational_to_f64).collect();
                let n = norm(&v);
                let m = (r_min / n).floor() + 1.0;
                if best.as_ref().is_none_or(|(b, _)| m * n < *b - 1e-12) {
                    best = Some((m * n, v.into_iter().map(|x| x * m).collect()));
                }
            }
        }
        let mut i = 0;
        loop {
            if i == rk {
                return best.map(|(_, v)| v);
            }
            if coef[i] < range {
                coef[i] += 1;
                break;
            }
            coef[i] = -range;
            i += 1;
        }
    }
}
