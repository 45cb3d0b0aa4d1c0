//! Symbolic expansion of `x_1 * x_2 * ... * x_N` and the structural checks
//! on its nonlinear part `P_N`.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde_json::json;

use crate::algebra::{Algebra, LieVector};
use crate::bch::{symbolic_vector, GroupLawTable, Law};
use crate::error::{Error, Result};
use crate::poly::{Monomial, Polynomial, Var};
use crate::report::LemmaReport;
use crate::scalar::{Rational, Ring};

pub const DEFAULT_MONOMIAL_CAP: usize = 1_000_000;

/// Nonlinear part of the `N`-fold product, one polynomial per label.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductExpansion {
    pub n: usize,
    pub polys: Vec<Polynomial>,
}

impl ProductExpansion {
    pub fn monomial_count(&self) -> usize {
        self.polys.iter().map(|p| p.len()).sum()
    }

    /// Evaluate `sum_k x_k + P_N` at a concrete sequence of length `n`.
    pub fn evaluate<S: Ring>(&self, xs: &[LieVector<S>], algebra: &Algebra) -> Result<LieVector<S>> {
        if xs.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: xs.len(),
            });
        }
        let basis = algebra.basis();
        let value = |v: &Var| xs[v.seq as usize - 1].coords[basis.position(v.label()).unwrap()].clone();
        let coords = self
            .polys
            .iter()
            .enumerate()
            .map(|(c, p)| {
                let linear = xs.iter().fold(S::zero(), |acc, x| acc + x.coords[c].clone());
                linear + p.eval(value)
            })
            .collect();
        Ok(LieVector::new(coords))
    }
}

/// Incremental expansion `Pi_N = Pi_{N-1} * x_N` with a monomial budget.
#[derive(Debug, Clone)]
pub struct ProductExpander {
    algebra: Algebra,
    law: Law<Polynomial>,
    product: Vec<Polynomial>,
    linear: Vec<Polynomial>,
    expansions: Vec<ProductExpansion>,
    cap: usize,
}

impl ProductExpander {
    pub fn new(table: &GroupLawTable, cap: usize) -> Self {
        let algebra = table.algebra().clone();
        let first = symbolic_vector(&algebra, 1).coords;
        ProductExpander {
            law: table.compile(),
            product: first.clone(),
            linear: first,
            expansions: vec![ProductExpansion {
                n: 1,
                polys: vec![Polynomial::zero(); algebra.dim()],
            }],
            algebra,
            cap,
        }
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn len(&self) -> usize {
        self.expansions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.expansions.is_empty()
    }

    fn advance(&mut self) -> Result<()> {
        let k = self.expansions.len() as u32 + 1;
        let x = symbolic_vector(&self.algebra, k).coords;
        let mut next = Vec::with_capacity(self.algebra.dim());
        self.law.multiply_slices(&self.product, &x, &mut next);
        let stored: usize = next.iter().map(|p| p.len()).sum();
        if stored > self.cap {
            return Err(Error::ResourceExhausted {
                stored,
                cap: self.cap,
            });
        }
        for (l, xv) in self.linear.iter_mut().zip(x) {
            *l = l.add_ref(&xv);
        }
        let polys = next.iter().zip(&self.linear).map(|(p, l)| p.clone() - l.clone()).collect();
        self.product = next;
        self.expansions.push(ProductExpansion {
            n: k as usize,
            polys,
        });
        Ok(())
    }

    /// `P_n`, extending the memoized sequence as needed.
    pub fn expansion(&mut self, n: usize) -> Result<&ProductExpansion> {
        if n == 0 {
            return Err(Error::EmptySequence);
        }
        while self.expansions.len() < n {
            self.advance()?;
        }
        Ok(&self.expansions[n - 1])
    }
}

/// Expand `P_N` for a single `N` with the default budget.
pub fn expand_product(table: &GroupLawTable, n: usize) -> Result<ProductExpansion> {
    expand_product_with_cap(table, n, DEFAULT_MONOMIAL_CAP)
}

pub fn expand_product_with_cap(table: &GroupLawTable, n: usize, cap: usize) -> Result<ProductExpansion> {
    let mut e = ProductExpander::new(table, cap);
    Ok(e.expansion(n)?.clone())
}

/// Binomial coefficient as `u128`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

/// Group the monomials of `p` by type class.
pub fn type_classes(p: &Polynomial) -> BTreeMap<Monomial, Vec<(Monomial, Rational)>> {
    let mut classes: BTreeMap<Monomial, Vec<(Monomial, Rational)>> = BTreeMap::new();
    for (m, c) in p.terms() {
        classes.entry(m.type_class()).or_default().push((m.clone(), c.clone()));
    }
    classes
}

/// First violation of the invariance property for a polynomial in
/// `x_1 .. x_n`: every member of a type class carries the same coefficient,
/// and every one of the `C(n, r)` members is present.
pub fn invariance_witness(p: &Polynomial, n: usize) -> Option<String> {
    for (class, members) in type_classes(p) {
        let c0 = &members[0].1;
        if let Some((m, c)) = members.iter().find(|(_, c)| c != c0) {
            return Some(format!(
                "type class {class}: coefficient {c0} at {} but {c} at {m}",
                members[0].0
            ));
        }
        let r = class.index_set().len() as u64;
        let expected = binomial(n as u64, r);
        if members.len() as u128 != expected {
            return Some(format!(
                "type class {class}: {} of {expected} index choices present",
                members.len()
            ));
        }
    }
    None
}

/// Degree bound, stability from `N` to `M`, and invariance of `P_M`.
pub fn check_product_lemma(
    algebra: &Algebra,
    small: &ProductExpansion,
    large: &ProductExpansion,
) -> Vec<LemmaReport> {
    let labels = algebra.basis().labels();
    let params = json!({ "N": small.n, "M": large.n });

    let mut degree = None;
    'outer: for e in [small, large] {
        for (c, p) in e.polys.iter().enumerate() {
            for (m, _) in p.terms() {
                if m.hom_degree() as usize > labels[c].level {
                    degree = Some(format!(
                        "P_{}{} contains {m} of homogeneous degree {}",
                        e.n,
                        labels[c],
                        m.hom_degree()
                    ));
                    break 'outer;
                }
            }
        }
    }

    let mut stability = None;
    'outer2: for (c, p) in small.polys.iter().enumerate() {
        for (m, coef) in p.terms() {
            let other = large.polys[c].coefficient(m);
            if &other != coef {
                stability = Some(format!(
                    "{m} at {}: {coef} in P_{} but {other} in P_{}",
                    labels[c], small.n, large.n
                ));
                break 'outer2;
            }
        }
    }

    let invariance = large.polys.iter().enumerate().find_map(|(c, p)| {
        invariance_witness(p, large.n).map(|w| format!("P_{}{}: {w}", large.n, labels[c]))
    });

    vec![
        LemmaReport::from_witness("product_degree_bound", params.clone(), degree),
        LemmaReport::from_witness("product_stability", params.clone(), stability),
        LemmaReport::from_witness("product_invariance", params, invariance),
    ]
}
