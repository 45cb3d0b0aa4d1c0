//! Group law in exponential coordinates via the truncated
//! Baker-Campbell-Hausdorff series.
//!
//! The series is generated from Dynkin's formula as a combination of
//! right-nested brackets `[w_1, [w_2, ... [w_{m-1}, w_m]]]` in two letters,
//! truncated at bracket depth equal to the step. Evaluating those brackets on
//! symbolic vectors gives one exact polynomial per output coordinate.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::algebra::{Algebra, Label, LieVector};
use crate::error::{Error, Result};
use crate::poly::{Monomial, Polynomial, TermDoc, Var};
use crate::scalar::{Rational, Ring};

/// Letter of a two-variable Lie word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    X,
    Y,
}

fn factorial(n: u32) -> Rational {
    (1..=n as i64).fold(Rational::one(), |acc, k| acc * crate::scalar::rint(k))
}

/// Coefficients of `log(exp X exp Y)` on right-nested bracket words of
/// length at most `depth`, from Dynkin's formula.
pub fn dynkin_words(depth: usize) -> BTreeMap<Vec<Letter>, Rational> {
    let mut words: BTreeMap<Vec<Letter>, Rational> = BTreeMap::new();
    // pairs (r_i, s_i) with r_i + s_i >= 1, total length <= depth
    fn recurse(
        depth: usize,
        pairs: &mut Vec<(u32, u32)>,
        used: usize,
        words: &mut BTreeMap<Vec<Letter>, Rational>,
    ) {
        if !pairs.is_empty() {
            let n = pairs.len() as i64;
            let m = used as i64;
            let mut denom = Rational::from_integer(m.into()) * Rational::from_integer(n.into());
            for (r, s) in pairs.iter() {
                denom = denom * factorial(*r) * factorial(*s);
            }
            let sign = if n % 2 == 1 { Rational::one() } else { -Rational::one() };
            let coef = sign / denom;
            let mut word = Vec::with_capacity(used);
            for (r, s) in pairs.iter() {
                word.extend(std::iter::repeat_n(Letter::X, *r as usize));
                word.extend(std::iter::repeat_n(Letter::Y, *s as usize));
            }
            let vanishes = word.len() >= 2 && word[word.len() - 1] == word[word.len() - 2];
            if !vanishes {
                *words.entry(word).or_insert_with(Rational::zero) += coef;
            }
        }
        for total in 1..=(depth - used) {
            for r in 0..=total {
                pairs.push((r as u32, (total - r) as u32));
                recurse(depth, pairs, used + total, words);
                pairs.pop();
            }
        }
    }
    recurse(depth, &mut Vec::new(), 0, &mut words);
    words.retain(|_, c| !c.is_zero());
    words
}

/// Evaluate a right-nested bracket word with letters bound to `x` and `y`.
fn eval_word<S: Ring>(alg: &Algebra, word: &[Letter], x: &LieVector<S>, y: &LieVector<S>) -> LieVector<S> {
    let pick = |l: Letter| if l == Letter::X { x } else { y };
    let mut acc = pick(word[word.len() - 1]).clone();
    for &l in word[..word.len() - 1].iter().rev() {
        acc = alg.bracket_unchecked(pick(l), &acc);
    }
    acc
}

/// Symbolic vector of the variables `x_seq^{(i,j)}`.
pub fn symbolic_vector(alg: &Algebra, seq: u32) -> LieVector<Polynomial> {
    LieVector::new(
        alg.basis()
            .labels()
            .iter()
            .map(|l| Polynomial::var(Var::new(seq, *l)))
            .collect(),
    )
}

/// Exact group-law polynomials `z = x * y`; `x` uses sequence index 1 and
/// `y` sequence index 2.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupLawTable {
    algebra: Algebra,
    polys: Vec<Polynomial>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawEntryDoc {
    pub label: [usize; 2],
    pub terms: Vec<TermDoc>,
}

impl GroupLawTable {
    pub fn build(algebra: &Algebra) -> Result<Self> {
        let x = symbolic_vector(algebra, 1);
        let y = symbolic_vector(algebra, 2);
        let mut z = LieVector::<Polynomial>::zero(algebra.dim());
        for (word, coef) in dynkin_words(algebra.step()) {
            let term = eval_word(algebra, &word, &x, &y);
            for (zc, tc) in z.coords.iter_mut().zip(term.coords) {
                zc.add_scaled(&tc, &coef);
            }
        }
        let table = GroupLawTable {
            algebra: algebra.clone(),
            polys: z.coords,
        };
        table.check_invariants()?;
        Ok(table)
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn polynomials(&self) -> &[Polynomial] {
        &self.polys
    }

    pub fn polynomial(&self, label: Label) -> Result<&Polynomial> {
        Ok(&self.polys[self.algebra.basis().position(label)?])
    }

    /// Level-n output is `x + y` plus terms of homogeneous degree at most n
    /// that involve both factors; level-1 output is exactly `x + y`.
    pub fn check_invariants(&self) -> Result<()> {
        let basis = self.algebra.basis();
        for (c, p) in self.polys.iter().enumerate() {
            let label = basis.labels()[c];
            let lin = Polynomial::var(Var::new(1, label)) + Polynomial::var(Var::new(2, label));
            let rest = p.clone() - lin;
            for (m, _) in rest.terms() {
                let bad = m.hom_degree() as usize > label.level
                    || m.index_set().len() < 2
                    || (label.level == 1);
                if bad {
                    return Err(Error::Unvalidated(format!(
                        "group law output {label} has unexpected monomial {m}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_doc(&self) -> Vec<LawEntryDoc> {
        let name = |v: &Var| {
            let side = if v.seq == 1 { "x" } else { "y" };
            format!("{side}^({},{})", v.level, v.index)
        };
        self.algebra
            .basis()
            .labels()
            .iter()
            .zip(&self.polys)
            .map(|(l, p)| LawEntryDoc {
                label: [l.level, l.index],
                terms: p.to_json_terms(name),
            })
            .collect()
    }

    pub fn compile<S: Ring>(&self) -> Law<S> {
        let q = self.algebra.dim();
        let basis = self.algebra.basis();
        let outputs = self
            .polys
            .iter()
            .enumerate()
            .map(|(c, p)| {
                let label = basis.labels()[c];
                let lin = Polynomial::var(Var::new(1, label)) + Polynomial::var(Var::new(2, label));
                let rest = p.clone() - lin;
                rest.terms()
                    .map(|(m, coef)| {
                        let mut vars = SmallVec::new();
                        for (v, e) in m.factors() {
                            let pos = basis.position(v.label()).unwrap();
                            let idx = if v.seq == 1 { pos } else { q + pos };
                            for _ in 0..*e {
                                vars.push(idx as u16);
                            }
                        }
                        LawTerm {
                            coef: S::from_rational(coef),
                            vars,
                        }
                    })
                    .collect()
            })
            .collect();
        Law {
            algebra: self.algebra.clone(),
            outputs,
        }
    }
}

/// Build the exact group-law table for an algebra.
pub fn build_group_law(algebra: &Algebra) -> Result<GroupLawTable> {
    GroupLawTable::build(algebra)
}

#[derive(Debug, Clone)]
struct LawTerm<S> {
    coef: S,
    /// Indices into `x ++ y`, repeated by exponent.
    vars: SmallVec<[u16; 4]>,
}

/// Group law compiled for one scalar representation.
#[derive(Debug, Clone)]
pub struct Law<S> {
    algebra: Algebra,
    outputs: Vec<Vec<LawTerm<S>>>,
}

impl<S: Ring> Law<S> {
    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn identity(&self) -> LieVector<S> {
        LieVector::zero(self.dim())
    }

    /// `x^{-1} = -x` in exponential coordinates of the first kind.
    pub fn inverse(&self, x: &LieVector<S>) -> LieVector<S> {
        x.neg()
    }

    pub fn multiply(&self, x: &LieVector<S>, y: &LieVector<S>) -> Result<LieVector<S>> {
        self.algebra.check_vector(x)?;
        self.algebra.check_vector(y)?;
        let mut out = Vec::with_capacity(self.dim());
        self.multiply_slices(&x.coords, &y.coords, &mut out);
        Ok(LieVector::new(out))
    }

    /// `out = x * y` on raw coordinate slices (no length checks).
    pub fn multiply_slices(&self, x: &[S], y: &[S], out: &mut Vec<S>) {
        let q = x.len();
        out.clear();
        for (c, terms) in self.outputs.iter().enumerate() {
            let mut acc = x[c].clone() + y[c].clone();
            for t in terms {
                let mut prod = t.coef.clone();
                for &v in &t.vars {
                    let v = v as usize;
                    let val = if v < q { &x[v] } else { &y[v - q] };
                    prod = prod * val.clone();
                }
                acc = acc + prod;
            }
            out.push(acc);
        }
    }

    /// Left fold `x_1 * x_2 * ... * x_N`.
    pub fn product(&self, xs: &[LieVector<S>]) -> Result<LieVector<S>> {
        let (first, rest) = xs.split_first().ok_or(Error::EmptySequence)?;
        self.algebra.check_vector(first)?;
        let mut acc = first.coords.clone();
        let mut buf = Vec::with_capacity(self.dim());
        for x in rest {
            self.algebra.check_vector(x)?;
            self.multiply_slices(&acc, &x.coords, &mut buf);
            std::mem::swap(&mut acc, &mut buf);
        }
        Ok(LieVector::new(acc))
    }

    /// Group commutator `a * b * a^{-1} * b^{-1}`.
    pub fn commutator(&self, a: &LieVector<S>, b: &LieVector<S>) -> Result<LieVector<S>> {
        self.product(&[a.clone(), b.clone(), a.neg(), b.neg()])
    }
}

impl Law<f64> {
    /// `acc <- acc * y` without allocating; `scratch` must have length q.
    #[inline]
    pub fn right_multiply_in_place(&self, acc: &mut [f64], y: &[f64], scratch: &mut [f64]) {
        scratch.copy_from_slice(acc);
        let q = acc.len();
        for (c, terms) in self.outputs.iter().enumerate() {
            let mut v = scratch[c] + y[c];
            for t in terms {
                let mut prod = t.coef;
                for &i in &t.vars {
                    let i = i as usize;
                    prod *= if i < q { scratch[i] } else { y[i - q] };
                }
                v += prod;
            }
            acc[c] = v;
        }
    }
}

/// `x' = g * x * h` and its inverse map, both as polynomial maps in the
/// variables `x_1^{(i,j)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Translation {
    pub forward: Vec<Polynomial>,
    pub inverse: Vec<Polynomial>,
    pub height: Rational,
}

impl Translation {
    pub fn apply<S: Ring>(&self, x: &LieVector<S>, basis: &crate::algebra::GradedBasis) -> LieVector<S> {
        eval_map(&self.forward, x, basis)
    }

    pub fn apply_inverse<S: Ring>(&self, x: &LieVector<S>, basis: &crate::algebra::GradedBasis) -> LieVector<S> {
        eval_map(&self.inverse, x, basis)
    }
}

fn eval_map<S: Ring>(map: &[Polynomial], x: &LieVector<S>, basis: &crate::algebra::GradedBasis) -> LieVector<S> {
    LieVector::new(
        map.iter()
            .map(|p| p.eval(|v| x.coords[basis.position(v.label()).unwrap()].clone()))
            .collect(),
    )
}

/// Compose two polynomial maps: `outer(inner(x))`.
pub fn compose_maps(outer: &[Polynomial], inner: &[Polynomial], basis: &crate::algebra::GradedBasis) -> Vec<Polynomial> {
    outer
        .iter()
        .map(|p| p.substitute(|v| inner[basis.position(v.label()).unwrap()].clone()))
        .collect()
}

/// Polynomials `p_{g,h}(x) = g * x * h`, the inverse `q_{g,h}` obtained by
/// level-by-level back-substitution, and the height of `p_{g,h}`.
pub fn translate_polynomials(
    table: &GroupLawTable,
    g: &LieVector<Rational>,
    h: &LieVector<Rational>,
) -> Result<Translation> {
    let alg = table.algebra();
    alg.check_vector(g)?;
    alg.check_vector(h)?;
    let law = table.compile::<Polynomial>();
    let lift = |v: &LieVector<Rational>| {
        LieVector::new(v.coords.iter().map(|c| Polynomial::constant(c.clone())).collect())
    };
    let x = symbolic_vector(alg, 1);
    let forward = law.product(&[lift(g), x, lift(h)])?.coords;

    let basis = alg.basis();
    let q = alg.dim();
    let mut inverse: Vec<Polynomial> = vec![Polynomial::zero(); q];
    for level in 1..=alg.step() {
        for c in basis.level_range(level) {
            let own = Monomial::var(Var::new(1, basis.labels()[c]));
            let p = &forward[c];
            if p.coefficient(&own) != Rational::one() {
                return Err(Error::Unvalidated(format!(
                    "translation is not unipotent at {}",
                    basis.labels()[c]
                )));
            }
            let rest = p.filter(|m| *m != own);
            if rest
                .terms()
                .any(|(m, _)| m.factors().iter().any(|(v, _)| v.level as usize >= level))
            {
                return Err(Error::Unvalidated(format!(
                    "translation at {} depends on same-or-higher levels",
                    basis.labels()[c]
                )));
            }
            // x_c = x'_c - rest(x_{<level}), with lower levels already inverted
            let substituted =
                rest.substitute(|v| inverse[basis.position(v.label()).unwrap()].clone());
            inverse[c] = Polynomial::var(Var::new(1, basis.labels()[c])) - substituted;
        }
    }
    let height = forward
        .iter()
        .map(|p| p.height())
        .max()
        .unwrap_or_else(Rational::zero);
    Ok(Translation {
        forward,
        inverse,
        height,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::scalar::{ratio, rint};

    fn law_for(name: &str) -> (GroupLawTable, Law<Rational>) {
        let t = build_group_law(&catalog::lookup(name).unwrap().algebra).unwrap();
        let l = t.compile();
        (t, l)
    }

    #[test]
    fn dynkin_low_order_terms() {
        let w = dynkin_words(3);
        use Letter::*;
        assert_eq!(w[&vec![X]], rint(1));
        assert_eq!(w[&vec![Y]], rint(1));
        // 1/2 [X,Y] arrives as c_XY [X,Y] + c_YX [Y,X]
        let xy = w.get(&vec![X, Y]).cloned().unwrap_or_default()
            - w.get(&vec![Y, X]).cloned().unwrap_or_default();
        assert_eq!(xy, ratio(1, 2));
    }

    #[test]
    fn heisenberg_table() {
        let (t, _) = law_for("heisenberg3");
        let v = |seq, i, j| Polynomial::var(Var::new(seq, Label::new(i, j)));
        let expected = v(1, 2, 1) + v(2, 2, 1)
            + (v(1, 1, 1) * v(2, 1, 2) - v(1, 1, 2) * v(2, 1, 1)).scale(&ratio(1, 2));
        assert_eq!(t.polynomial(Label::new(2, 1)).unwrap(), &expected);
        assert_eq!(
            t.polynomial(Label::new(1, 1)).unwrap(),
            &(v(1, 1, 1) + v(2, 1, 1))
        );
    }

    #[test]
    fn free_step3_has_twelfth_terms() {
        // log(e^X e^Y) level 3 = 1/12 [X,[X,Y]] - 1/12 [Y,[X,Y]]; for X = X1,
        // Y = X2: [X1,[X1,X2]] = -X4 and [X2,[X1,X2]] = -X5.
        let (_, law) = law_for("free2step3");
        let x = LieVector::<Rational>::from_i64(&[1, 0, 0, 0, 0]);
        let y = LieVector::<Rational>::from_i64(&[0, 1, 0, 0, 0]);
        let z = law.multiply(&x, &y).unwrap();
        assert_eq!(
            z.coords,
            vec![rint(1), rint(1), ratio(1, 2), ratio(-1, 12), ratio(1, 12)]
        );
    }

    #[test]
    fn abelian_law_is_addition() {
        let alg = crate::algebra::Algebra::abelian(vec![2, 1]).unwrap();
        let t = build_group_law(&alg).unwrap();
        for (c, p) in t.polynomials().iter().enumerate() {
            let l = alg.basis().labels()[c];
            assert_eq!(
                p,
                &(Polynomial::var(Var::new(1, l)) + Polynomial::var(Var::new(2, l)))
            );
        }
    }

    #[test]
    fn multiply_examples() {
        let (_, law) = law_for("heisenberg3");
        let a = LieVector::<Rational>::from_i64(&[1, 0, 0]);
        let b = LieVector::<Rational>::from_i64(&[0, 1, 0]);
        let ab = law.multiply(&a, &b).unwrap();
        assert_eq!(ab, LieVector::from_ratios(&[(1, 1), (1, 1), (1, 2)]));
        let c = LieVector::<Rational>::from_i64(&[-1, 0, 0]);
        assert_eq!(law.multiply(&ab, &c).unwrap(), LieVector::from_i64(&[0, 1, 1]));
        assert_eq!(law.product(&[a.clone(), b.clone(), c]).unwrap(), LieVector::from_i64(&[0, 1, 1]));
        let x = LieVector::<Rational>::from_ratios(&[(2, 3), (-5, 7), (1, 9)]);
        assert!(law.multiply(&x, &x.neg()).unwrap().is_zero());
        assert_eq!(law.product(std::slice::from_ref(&x)).unwrap(), x);
        assert!(matches!(law.product(&[]), Err(Error::EmptySequence)));
        let commuting = [
            LieVector::from_i64(&[1, 0, 0]),
            LieVector::from_i64(&[2, 0, 0]),
            LieVector::from_i64(&[3, 0, 0]),
        ];
        assert_eq!(law.product(&commuting).unwrap(), LieVector::from_i64(&[6, 0, 0]));
        assert!(law.multiply(&LieVector::from_i64(&[1, 0]), &a).is_err());
    }

    #[test]
    fn float_law_matches_exact() {
        let (t, exact) = law_for("ut4");
        let float = t.compile::<f64>();
        let x = LieVector::<Rational>::from_ratios(&[(1, 2), (-3, 4), (5, 3), (1, 7), (2, 1), (-1, 3)]);
        let y = LieVector::<Rational>::from_ratios(&[(3, 2), (1, 4), (-2, 3), (6, 7), (0, 1), (4, 3)]);
        let z = exact.multiply(&x, &y).unwrap().to_f64();
        let zf = float.multiply(&x.to_f64(), &y.to_f64()).unwrap();
        for (a, b) in z.coords.iter().zip(&zf.coords) {
            assert!((a - b).abs() < 1e-12);
        }
        let mut acc = x.to_f64().coords;
        let mut scratch = vec![0.0; 6];
        float.right_multiply_in_place(&mut acc, &y.to_f64().coords, &mut scratch);
        assert_eq!(acc, zf.coords);
    }

    #[test]
    fn translation_examples() {
        let (t, _) = law_for("heisenberg3");
        let basis = t.algebra().basis().clone();
        let zero = LieVector::<Rational>::zero(3);
        let id = translate_polynomials(&t, &zero, &zero).unwrap();
        let x = symbolic_vector(t.algebra(), 1).coords;
        assert_eq!(id.forward, x);
        assert_eq!(id.inverse, x);
        assert_eq!(id.height, rint(1));

        let g = LieVector::<Rational>::from_i64(&[1, 0, 0]);
        let tr = translate_polynomials(&t, &g, &zero).unwrap();
        let v = |i, j| Polynomial::var(Var::new(1, Label::new(i, j)));
        assert_eq!(tr.forward[0], v(1, 1) + Polynomial::constant(rint(1)));
        assert_eq!(tr.forward[2], v(2, 1) + v(1, 2).scale(&ratio(1, 2)));
        assert_eq!(compose_maps(&tr.inverse, &tr.forward, &basis), x);
        assert_eq!(compose_maps(&tr.forward, &tr.inverse, &basis), x);

        let big = LieVector::<Rational>::from_i64(&[0, 0, 1000]);
        assert_eq!(translate_polynomials(&t, &big, &zero).unwrap().height, rint(1000));
        let small = LieVector::<Rational>::from_ratios(&[(0, 1), (0, 1), (1, 3)]);
        assert_eq!(translate_polynomials(&t, &small, &zero).unwrap().height, rint(1));
    }

    #[test]
    fn inverse_map_equals_negated_translation() {
        // q_{g,h} = p_{-g,-h}: an independent route to the back-substitution
        let (t, _) = law_for("free2step3");
        let g = LieVector::<Rational>::from_ratios(&[(1, 2), (-2, 1), (3, 1), (1, 5), (-1, 1)]);
        let h = LieVector::<Rational>::from_ratios(&[(0, 1), (1, 3), (-1, 2), (2, 1), (1, 7)]);
        let tr = translate_polynomials(&t, &g, &h).unwrap();
        let neg = translate_polynomials(&t, &g.neg(), &h.neg()).unwrap();
        // p_{-g,-h}(x) = (-g) * x * (-h), and q_{g,h} must invert g * x * h
        let law = t.compile::<Polynomial>();
        let lift = |v: &LieVector<Rational>| {
            LieVector::new(v.coords.iter().map(|c| Polynomial::constant(c.clone())).collect())
        };
        let x = symbolic_vector(t.algebra(), 1);
        let direct = law.product(&[lift(&g.neg()), x, lift(&h.neg())]).unwrap();
        assert_eq!(neg.forward, direct.coords);
        assert_eq!(tr.inverse, neg.forward);
    }

    #[test]
    fn law_doc_has_every_label() {
        let (t, _) = law_for("ut4");
        let doc = t.to_doc();
        assert_eq!(doc.len(), 6);
        assert!(doc[5].terms.iter().any(|term| term.den == "2"));
    }
}
