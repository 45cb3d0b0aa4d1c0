//! Measure of `{x in [-1/2, 1/2]^q : ||p(x)|| <= alpha}` for polynomial maps
//! `p: R^q -> R^q`, by quasi-Monte Carlo.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::measures::cramer::radical_inverse;
use crate::error::{Error, Result};

/// A polynomial map given per output component as `(exponents, coefficient)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyMap {
    pub q: usize,
    pub components: Vec<Vec<(Vec<u32>, f64)>>,
}

impl PolyMap {
    pub fn validate(&self) -> Result<()> {
        if self.q == 0 || self.components.len() != self.q {
            return Err(Error::InvalidConfig("a polynomial map needs q components".into()));
        }
        if self.components.iter().flatten().any(|(e, c)| e.len() != self.q || !c.is_finite()) {
            return Err(Error::InvalidConfig("bad monomial in polynomial map".into()));
        }
        Ok(())
    }

    pub fn degree(&self) -> u32 {
        self.components
            .iter()
            .flatten()
            .filter(|(_, c)| *c != 0.0)
            .map(|(e, _)| e.iter().sum())
            .max()
            .unwrap_or(0)
    }

    /// Largest absolute coefficient.
    pub fn height(&self) -> f64 {
        self.components.iter().flatten().map(|(_, c)| c.abs()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> PolyMap {
        PolyMap {
            q: self.q,
            components: self
                .components
                .iter()
                .map(|c| c.iter().map(|(e, v)| (e.clone(), v * s)).collect())
                .collect(),
        }
    }

    pub fn norm_at(&self, x: &[f64]) -> f64 {
        self.components
            .iter()
            .map(|c| {
                c.iter()
                    .map(|(e, v)| v * x.iter().zip(e).map(|(xi, k)| xi.powi(*k as i32)).product::<f64>())
                    .sum::<f64>()
                    .powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Dense random map of degree exactly `s` with integer coefficients in
    /// `[-5, 5]` and no constant term, so that `p(0) = 0` and every
    /// sublevel set is nonempty.
    pub fn random(q: usize, s: u32, seed: u64) -> PolyMap {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut exps = exponents_up_to(q, s);
        exps.retain(|e| e.iter().any(|k| *k > 0));
        let components = (0..q)
            .map(|_| {
                exps.iter()
                    .map(|e| (e.clone(), rng.random_range(-5i32..=5) as f64))
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>();
        let mut p = PolyMap { q, components };
        if p.degree() < s {
            let top = exps.iter().position(|e| e.iter().sum::<u32>() == s).unwrap();
            p.components[0][top].1 = 1.0;
        }
        p
    }
}

fn exponents_up_to(q: usize, s: u32) -> Vec<Vec<u32>> {
    if q == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 0..=s {
        for mut rest in exponents_up_to(q - 1, s - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn halton_norms(p: &PolyMap, points: u64) -> Vec<f64> {
    let mut x = vec![0.0; p.q];
    (1..=points)
        .map(|i| {
            for (c, v) in x.iter_mut().enumerate() {
                *v = radical_inverse(i, PRIMES[c % PRIMES.len()]) - 0.5;
            }
            p.norm_at(&x)
        })
        .collect()
}

/// Halton estimate of the sublevel-set measure using `points` points.
pub fn sublevel_measure(p: &PolyMap, alpha: f64, points: u64) -> f64 {
    let hits = halton_norms(p, points).into_iter().filter(|v| *v <= alpha).count();
    hits as f64 / points as f64
}

/// Values with fewer hits are below the quasi-Monte Carlo resolution and
/// are left out of the spread.
pub const MIN_HITS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SublevelValue {
    pub alpha: f64,
    pub scale: f64,
    pub measure: f64,
    /// `meas * ht^{1/s} / alpha^{1/s}`.
    pub ratio: f64,
    pub hits: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub median_ratio: f64,
    /// `max(ratio / median, median / ratio)` over resolved values.
    pub spread: f64,
    pub max_ratio: f64,
    pub resolved: usize,
    pub unresolved: usize,
}

/// Median and spread of the resolved `(ratio, hits)` pairs.
pub fn summarize(values: &[(f64, u64)]) -> RatioSummary {
    let mut r: Vec<f64> = values.iter().filter(|v| v.1 >= MIN_HITS).map(|v| v.0).collect();
    r.sort_by(f64::total_cmp);
    let median = match r.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => r[n / 2],
        n => 0.5 * (r[n / 2 - 1] + r[n / 2]),
    };
    let spread = r.iter().map(|v| (v / median).max(median / v)).fold(1.0, f64::max);
    RatioSummary {
        median_ratio: median,
        spread: if r.is_empty() { f64::INFINITY } else { spread },
        max_ratio: r.last().copied().unwrap_or(f64::NAN),
        resolved: r.len(),
        unresolved: values.len() - r.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SublevelCase {
    pub index: usize,
    pub q: usize,
    pub degree: u32,
    pub height: f64,
    pub values: Vec<SublevelValue>,
    pub summary: RatioSummary,
}

pub fn sublevel_case(index: usize, p: &PolyMap, alphas: &[f64], scales: &[f64], points: u64) -> Result<SublevelCase> {
    p.validate()?;
    let s = p.degree().max(1) as f64;
    let mut values = Vec::new();
    // scaling p by c moves the threshold to alpha / c
    let mut norms = halton_norms(p, points);
    norms.sort_by(f64::total_cmp);
    for &scale in scales {
        let ht = p.scaled(scale).height();
        for &alpha in alphas {
            let hits = norms.partition_point(|v| *v * scale <= alpha) as u64;
            let measure = hits as f64 / points as f64;
            values.push(SublevelValue {
                alpha,
                scale,
                measure,
                ratio: measure * (ht / alpha).powf(1.0 / s),
                hits,
            });
        }
    }
    let summary = summarize(&values.iter().map(|v| (v.ratio, v.hits)).collect::<Vec<_>>());
    Ok(SublevelCase {
        index,
        q: p.q,
        degree: p.degree(),
        height: p.height(),
        values,
        summary,
    })
}
