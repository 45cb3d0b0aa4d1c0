//! Sparse multivariate polynomials with exact rational coefficients over
//! sequence-indexed variables `x_k^{(i,j)}`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::algebra::Label;
use crate::scalar::{Rational, Ring};

/// The variable `x_seq^{(level, index)}`; ordering is lexicographic on
/// `(seq, level, index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Var {
    pub seq: u32,
    pub level: u16,
    pub index: u16,
}

impl Var {
    pub fn new(seq: u32, label: Label) -> Self {
        Var {
            seq,
            level: label.level as u16,
            index: label.index as u16,
        }
    }

    pub fn label(&self) -> Label {
        Label::new(self.level as usize, self.index as usize)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}^({},{})", self.seq, self.level, self.index)
    }
}

/// Product of variables with positive exponents, sorted by variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Monomial(SmallVec<[(Var, u32); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(v: Var) -> Self {
        let mut s = SmallVec::new();
        s.push((v, 1));
        Monomial(s)
    }

    /// Build from arbitrary (possibly repeated, possibly zero-exponent) factors.
    pub fn from_factors<I: IntoIterator<Item = (Var, u32)>>(factors: I) -> Self {
        let mut map: BTreeMap<Var, u32> = BTreeMap::new();
        for (v, e) in factors {
            *map.entry(v).or_insert(0) += e;
        }
        Monomial(map.into_iter().filter(|(_, e)| *e > 0).collect())
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    /// Sum over factors of `level * exponent`.
    pub fn hom_degree(&self) -> u32 {
        self.0.iter().map(|(v, e)| v.level as u32 * e).sum()
    }

    /// Sorted distinct sequence indices.
    pub fn index_set(&self) -> Vec<u32> {
        let mut out: Vec<u32> = self.0.iter().map(|(v, _)| v.seq).collect();
        out.dedup();
        out
    }

    pub fn max_seq(&self) -> u32 {
        self.0.iter().map(|(v, _)| v.seq).max().unwrap_or(0)
    }

    /// The initial monomial of this monomial's type: sequence indices
    /// compressed to `1..=r` preserving order.
    pub fn type_class(&self) -> Monomial {
        let idx = self.index_set();
        self.reindex(|k| idx.binary_search(&k).unwrap() as u32 + 1)
    }

    pub fn is_initial(&self) -> bool {
        let idx = self.index_set();
        idx.iter().enumerate().all(|(p, &k)| k == p as u32 + 1)
    }

    /// Relabel sequence indices; factors are re-sorted and merged when the
    /// relabelling does not preserve order.
    pub fn reindex(&self, f: impl Fn(u32) -> u32) -> Monomial {
        let mapped: SmallVec<[(Var, u32); 4]> = self
            .0
            .iter()
            .map(|(v, e)| (Var { seq: f(v.seq), ..*v }, *e))
            .collect();
        if mapped.windows(2).all(|w| w[0].0 < w[1].0) {
            Monomial(mapped)
        } else {
            Monomial::from_factors(mapped)
        }
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// Exponent of `v` (0 if absent).
    pub fn exponent(&self, v: &Var) -> u32 {
        self.0
            .iter()
            .find(|(w, _)| w == v)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    /// Factors grouped by sequence index, in index order.
    pub fn blocks(&self) -> Vec<(u32, Vec<(Label, u32)>)> {
        let mut out: Vec<(u32, Vec<(Label, u32)>)> = Vec::new();
        for (v, e) in &self.0 {
            match out.last_mut() {
                Some((k, block)) if *k == v.seq => block.push((v.label(), *e)),
                _ => out.push((v.seq, vec![(v.label(), *e)])),
            }
        }
        out
    }

    pub fn eval<S: Ring>(&self, value: &impl Fn(&Var) -> S) -> S {
        let mut acc = S::one();
        for (v, e) in &self.0 {
            let x = value(v);
            for _ in 0..*e {
                acc = acc * x.clone();
            }
        }
        acc
    }
}

/// Graded lexicographic order.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.as_slice().cmp(other.0.as_slice()))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (n, (v, e)) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, "*")?;
            }
            write!(f, "{v}")?;
            if *e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Canonical sparse polynomial: zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn constant(c: Rational) -> Self {
        let mut p = Polynomial::default();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn var(v: Var) -> Self {
        let mut p = Polynomial::default();
        p.add_term(Monomial::var(v), Rational::one());
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(terms: I) -> Self {
        let mut p = Polynomial::default();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Polynomial, scale: &Rational) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c * scale);
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&Monomial::one())
    }

    /// Sum of absolute coefficients.
    pub fn l1_norm(&self) -> Rational {
        self.terms.values().map(|c| c.abs()).fold(Rational::zero(), |a, b| a + b)
    }

    /// Naive height: largest absolute coefficient.
    pub fn height(&self) -> Rational {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn scale(&self, s: &Rational) -> Polynomial {
        if s.is_zero() {
            return Polynomial::default();
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
    }

    /// Keep only terms satisfying the predicate.
    pub fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> Polynomial {
        Polynomial {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn mul_ref(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::default();
        if self.is_empty() || other.is_empty() {
            return out;
        }
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn add_ref(&self, other: &Polynomial) -> Polynomial {
        let (big, small) = if self.len() >= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn eval<S: Ring>(&self, value: impl Fn(&Var) -> S) -> S {
        let mut acc = S::zero();
        for (m, c) in &self.terms {
            acc = acc + S::from_rational(c) * m.eval(&value);
        }
        acc
    }

    /// Substitute a polynomial for every variable.
    pub fn substitute(&self, value: impl Fn(&Var) -> Polynomial) -> Polynomial {
        self.eval(value)
    }

    /// Relabel sequence indices in every monomial.
    pub fn reindex(&self, f: impl Fn(u32) -> u32) -> Polynomial {
        Polynomial::from_terms(self.terms.iter().map(|(m, c)| (m.reindex(&f), c.clone())))
    }

    /// JSON monomial schema: `[{monomial: [[var, exp], ...], num, den}]`.
    pub fn to_json_terms(&self, name: impl Fn(&Var) -> String) -> Vec<TermDoc> {
        self.terms
            .iter()
            .map(|(m, c)| TermDoc {
                monomial: m.factors().iter().map(|(v, e)| (name(v), *e)).collect(),
                num: c.numer().to_string(),
                den: c.denom().to_string(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDoc {
    pub monomial: Vec<(String, u32)>,
    pub num: String,
    pub den: String,
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (m, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})*{m}")?;
        }
        Ok(())
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(mut self, rhs: Polynomial) -> Polynomial {
        if self.len() < rhs.len() {
            return rhs + self;
        }
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(mut self, rhs: Polynomial) -> Polynomial {
        for (m, c) in rhs.terms {
            self.add_term(m, -c);
        }
        self
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        self.mul_ref(&rhs)
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect(),
        }
    }
}

impl Zero for Polynomial {
    fn zero() -> Self {
        Polynomial::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for Polynomial {
    fn one() -> Self {
        Polynomial::constant(Rational::one())
    }
}

impl Ring for Polynomial {
    fn from_rational(r: &Rational) -> Self {
        Polynomial::constant(r.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, rint};
    use proptest::prelude::*;

    fn v(seq: u32, level: usize, index: usize) -> Var {
        Var::new(seq, Label::new(level, index))
    }

    #[test]
    fn monomial_degrees_and_type() {
        let m = Monomial::from_factors([(v(3, 1, 1), 1), (v(7, 2, 1), 2), (v(3, 1, 2), 1)]);
        assert_eq!(m.degree(), 4);
        assert_eq!(m.hom_degree(), 6);
        assert_eq!(m.index_set(), vec![3, 7]);
        let t = m.type_class();
        assert_eq!(t.index_set(), vec![1, 2]);
        assert!(t.is_initial() && !m.is_initial());
        assert_eq!(t.exponent(&v(2, 2, 1)), 2);
        let lin = Monomial::from_factors([(v(1, 1, 1), 2), (v(2, 1, 2), 1)]);
        assert_eq!(lin.hom_degree(), lin.degree());
    }

    #[test]
    fn polynomial_arithmetic_cancels_exactly() {
        let x = Polynomial::var(v(1, 1, 1));
        let y = Polynomial::var(v(2, 1, 1));
        let p = (x.clone() + y.clone()) * (x.clone() - y.clone());
        let q = x.clone() * x.clone() - y.clone() * y.clone();
        assert_eq!(p, q);
        assert!((p.clone() - q).is_zero());
        assert_eq!(p.len(), 2);
        let half = p.scale(&ratio(1, 2));
        assert_eq!(half.height(), ratio(1, 2));
        assert_eq!(half.l1_norm(), rint(1));
        let val: Rational = p.eval(|var| if var.seq == 1 { rint(3) } else { rint(2) });
        assert_eq!(val, rint(5));
    }

    #[test]
    fn graded_lex_order() {
        let a = Monomial::var(v(2, 1, 1));
        let b = Monomial::from_factors([(v(1, 1, 1), 1), (v(1, 1, 2), 1)]);
        assert!(a < b, "degree dominates");
        let c = Monomial::var(v(1, 1, 1));
        assert!(c < a);
    }

    proptest! {
        #[test]
        fn multiplication_is_commutative_and_distributes(
            ca in -5i64..5, cb in -5i64..5, cc in -5i64..5,
            sa in 1u32..4, sb in 1u32..4,
        ) {
            let a = Polynomial::var(v(sa, 1, 1)).scale(&rint(ca)) + Polynomial::constant(rint(1));
            let b = Polynomial::var(v(sb, 1, 2)).scale(&rint(cb));
            let c = Polynomial::var(v(1, 2, 1)).scale(&rint(cc));
            prop_assert_eq!(a.mul_ref(&b), b.mul_ref(&a));
            prop_assert_eq!(a.mul_ref(&(b.clone() + c.clone())), a.mul_ref(&b) + a.mul_ref(&c));
        }
    }
}
