//! `f64` sampling compiled from a [`MeasureSpec`].

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;
use smallvec::SmallVec;

use super::MeasureSpec;
use crate::error::{Error, Result};
use crate::scalar::rational_to_f64;

type Buf = SmallVec<[f64; 8]>;

#[derive(Debug, Clone)]
pub enum Sampler {
    Discrete {
        atoms: Vec<Vec<f64>>,
        index: WeightedIndex<f64>,
    },
    Box {
        lo: Vec<f64>,
        width: Vec<f64>,
    },
    Gaussian {
        sd: Vec<f64>,
    },
    Mixture {
        components: Vec<Sampler>,
        index: WeightedIndex<f64>,
    },
    Sum {
        parts: Vec<Sampler>,
    },
    Affine {
        base: std::boxed::Box<Sampler>,
        base_dim: usize,
        matrix: Vec<Vec<f64>>,
        offset: Vec<f64>,
    },
}

fn weights(w: &[crate::scalar::Rational]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(w.iter().map(rational_to_f64)).map_err(|e| Error::InvalidMeasure(e.to_string()))
}

impl Sampler {
    pub fn new(spec: &MeasureSpec) -> Result<Self> {
        let f = |v: &[crate::scalar::Rational]| v.iter().map(rational_to_f64).collect::<Vec<f64>>();
        Ok(match spec {
            MeasureSpec::Discrete { atoms, weights: w } => Sampler::Discrete {
                atoms: atoms.iter().map(|a| f(a)).collect(),
                index: weights(w)?,
            },
            MeasureSpec::BoxUniform { intervals } => Sampler::Box {
                lo: intervals.iter().map(|(lo, _)| rational_to_f64(lo)).collect(),
                width: intervals.iter().map(|(lo, hi)| rational_to_f64(&(hi - lo))).collect(),
            },
            MeasureSpec::Gaussian { variances } => Sampler::Gaussian {
                sd: variances.iter().map(|v| rational_to_f64(v).sqrt()).collect(),
            },
            MeasureSpec::Mixture { components, weights: w } => Sampler::Mixture {
                components: components.iter().map(Sampler::new).collect::<Result<_>>()?,
                index: weights(w)?,
            },
            MeasureSpec::Sum { parts } => Sampler::Sum {
                parts: parts.iter().map(Sampler::new).collect::<Result<_>>()?,
            },
            MeasureSpec::Affine { base, matrix, offset } => Sampler::Affine {
                base: std::boxed::Box::new(Sampler::new(base)?),
                base_dim: base.dim(),
                matrix: matrix.iter().map(|r| f(r)).collect(),
                offset: f(offset),
            },
        })
    }

    /// Overwrite `out` with one draw.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            Sampler::Discrete { atoms, index } => out.copy_from_slice(&atoms[index.sample(rng)]),
            Sampler::Box { lo, width } => {
                for ((o, l), w) in out.iter_mut().zip(lo).zip(width) {
                    *o = if *w == 0.0 { *l } else { l + w * rng.random::<f64>() };
                }
            }
            Sampler::Gaussian { sd } => {
                for (o, s) in out.iter_mut().zip(sd) {
                    *o = if *s == 0.0 {
                        0.0
                    } else {
                        s * rng.sample::<f64, _>(StandardNormal)
                    };
                }
            }
            Sampler::Mixture { components, index } => components[index.sample(rng)].sample_into(rng, out),
            Sampler::Sum { parts } => {
                parts[0].sample_into(rng, out);
                let mut tmp: Buf = SmallVec::from_elem(0.0, out.len());
                for p in &parts[1..] {
                    p.sample_into(rng, &mut tmp);
                    for (o, t) in out.iter_mut().zip(&tmp) {
                        *o += t;
                    }
                }
            }
            Sampler::Affine {
                base,
                base_dim,
                matrix,
                offset,
            } => {
                let mut z: Buf = SmallVec::from_elem(0.0, *base_dim);
                base.sample_into(rng, &mut z);
                for ((o, row), b) in out.iter_mut().zip(matrix).zip(offset) {
                    *o = b + row.iter().zip(&z).map(|(a, x)| a * x).sum::<f64>();
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, dim: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        self.sample_into(rng, &mut v);
        v
    }
}
