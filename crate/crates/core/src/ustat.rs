//! Generalized U-statistics `sum_{l_1 < ... < l_r} prod_k m_k(x_{l_k})`.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{GradedBasis, Label, LieVector};
use crate::error::{Error, Result};
use crate::poly::{Monomial, Polynomial, Var};
use crate::product::{invariance_witness, type_classes};
use crate::scalar::{Rational, Ring};

/// One block per index in the tuple; each block is a monomial in a single
/// element's coordinates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UStatisticSpec {
    pub blocks: Vec<Vec<(Label, u32)>>,
}

impl UStatisticSpec {
    pub fn new(blocks: Vec<Vec<(Label, u32)>>) -> Result<Self> {
        if blocks.is_empty() || blocks.iter().any(|b| b.is_empty() || b.iter().any(|(_, e)| *e == 0)) {
            return Err(Error::InvalidConfig("U-statistic blocks must be nonempty with positive exponents".into()));
        }
        Ok(UStatisticSpec { blocks })
    }

    /// Single-block statistic `sum_l x_l^{label}`.
    pub fn linear(label: Label) -> Self {
        UStatisticSpec {
            blocks: vec![vec![(label, 1)]],
        }
    }

    pub fn r(&self) -> usize {
        self.blocks.len()
    }

    pub fn hom_degree(&self) -> usize {
        self.blocks
            .iter()
            .flatten()
            .map(|(l, e)| l.level * *e as usize)
            .sum()
    }

    /// The initial monomial `prod_k m_k(x_k)`.
    pub fn initial_monomial(&self) -> Monomial {
        Monomial::from_factors(self.blocks.iter().enumerate().flat_map(|(k, b)| {
            b.iter().map(move |(l, e)| (Var::new(k as u32 + 1, *l), *e))
        }))
    }

    fn block_value<S: Ring>(&self, k: usize, x: &LieVector<S>, basis: &GradedBasis) -> S {
        let mut acc = S::one();
        for (l, e) in &self.blocks[k] {
            let v = &x.coords[basis.position(*l).expect("label in basis")];
            for _ in 0..*e {
                acc = acc * v.clone();
            }
        }
        acc
    }
}

/// Evaluate by the `O(N r)` recursion over prefix sums of tuples.
pub fn u_evaluate<S: Ring>(spec: &UStatisticSpec, xs: &[LieVector<S>], basis: &GradedBasis) -> S {
    let r = spec.r();
    let mut sums = vec![S::zero(); r + 1];
    let mut comps = vec![S::zero(); r + 1];
    sums[0] = S::one();
    for x in xs {
        for k in (1..=r).rev() {
            let prev = S::finish_sum(sums[k - 1].clone(), comps[k - 1].clone());
            if prev.is_zero() {
                continue;
            }
            let term = prev * spec.block_value(k - 1, x, basis);
            let (s, c) = (&mut sums[k], &mut comps[k]);
            S::compensated_add(s, c, term);
        }
    }
    S::finish_sum(sums[r].clone(), comps[r].clone())
}

/// Expand the statistic as a polynomial in `x_1 .. x_n`.
pub fn u_expand(spec: &UStatisticSpec, n: usize) -> Polynomial {
    let initial = spec.initial_monomial();
    let r = spec.r();
    let mut out = Polynomial::zero();
    let mut idx: Vec<u32> = (1..=r as u32).collect();
    if r > n {
        return out;
    }
    loop {
        out.add_term(initial.reindex(|k| idx[k as usize - 1]), Rational::one());
        // next increasing tuple
        let mut p = r;
        loop {
            if p == 0 {
                return out;
            }
            p -= 1;
            if idx[p] < (n - (r - 1 - p)) as u32 {
                idx[p] += 1;
                for q in p + 1..r {
                    idx[q] = idx[q - 1] + 1;
                }
                break;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UDecomposition {
    pub terms: Vec<(UStatisticSpec, Rational)>,
    pub l1_norm: Rational,
}

impl UDecomposition {
    pub fn reexpand(&self, n: usize) -> Polynomial {
        self.terms.iter().fold(Polynomial::zero(), |acc, (s, c)| {
            let mut acc = acc;
            acc.add_scaled(&u_expand(s, n), c);
            acc
        })
    }
}

/// Write a polynomial in `x_1 .. x_n` as a combination of U-statistics,
/// one per type class.
pub fn u_decompose(p: &Polynomial, n: usize) -> Result<UDecomposition> {
    if let Some(w) = invariance_witness(p, n) {
        return Err(Error::InvarianceViolation(w));
    }
    let mut terms = Vec::new();
    let mut l1 = Rational::zero();
    for (class, members) in type_classes(p) {
        let coef = members[0].1.clone();
        let blocks = class.blocks().into_iter().map(|(_, b)| b).collect();
        l1 += coef.abs();
        terms.push((UStatisticSpec { blocks }, coef));
    }
    Ok(UDecomposition { terms, l1_norm: l1 })
}
