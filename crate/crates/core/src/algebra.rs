//! Graded nilpotent Lie algebras given by structure constants.
//!
//! Basis vectors are labelled `X_{i,j}` with level `i` (1-based) and index
//! `j` within the level. Coordinates are always stored in lexicographic label
//! order, so the level-1 block comes first.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Rational, Ring, Scalar};

/// Basis label `(level, index)`, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Label {
    pub level: usize,
    pub index: usize,
}

impl Label {
    pub const fn new(level: usize, index: usize) -> Self {
        Label { level, index }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.level, self.index)
    }
}

/// Graded basis `{X_{i,j}}` with `d_i` vectors at level `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedBasis {
    dims: Vec<usize>,
    labels: Vec<Label>,
    offsets: Vec<usize>,
}

impl GradedBasis {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidBasis("step must be at least 1".into()));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidBasis(format!(
                "every layer must be nonzero, got dims {dims:?}"
            )));
        }
        let mut labels = Vec::new();
        let mut offsets = Vec::with_capacity(dims.len() + 1);
        for (i, &d) in dims.iter().enumerate() {
            offsets.push(labels.len());
            labels.extend((1..=d).map(|j| Label::new(i + 1, j)));
        }
        offsets.push(labels.len());
        Ok(GradedBasis {
            dims,
            labels,
            offsets,
        })
    }

    pub fn step(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// `q`, the total dimension.
    pub fn total_dim(&self) -> usize {
        self.labels.len()
    }

    /// `D = sum_i i * d_i`.
    pub fn homogeneous_dim(&self) -> usize {
        self.dims.iter().enumerate().map(|(i, d)| (i + 1) * d).sum()
    }

    pub fn dim_of_level(&self, level: usize) -> usize {
        if level == 0 || level > self.step() {
            0
        } else {
            self.dims[level - 1]
        }
    }

    /// Coordinate range occupied by a level.
    pub fn level_range(&self, level: usize) -> std::ops::Range<usize> {
        assert!(level >= 1 && level <= self.step(), "level {level} out of range");
        self.offsets[level - 1]..self.offsets[level]
    }

    pub fn level_of(&self, pos: usize) -> usize {
        self.labels[pos].level
    }

    pub fn position(&self, label: Label) -> Result<usize> {
        if label.level == 0
            || label.level > self.step()
            || label.index == 0
            || label.index > self.dims[label.level - 1]
        {
            return Err(Error::LabelOutOfRange(label.level, label.index));
        }
        Ok(self.offsets[label.level - 1] + label.index - 1)
    }
}

/// A sparse vector of basis coefficients, sorted by position, no zeros.
pub type SparseVector = Vec<(usize, Rational)>;

/// Bracket tensor on ordered basis pairs. Pairs absent from the map bracket
/// to zero.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StructureConstants {
    entries: BTreeMap<(usize, usize), SparseVector>,
}

impl StructureConstants {
    pub fn new() -> Self {
        Self::default()
    }

    /// Set `[X_a, X_b]` (positions) to the given combination, replacing any
    /// previous value.
    pub fn set(&mut self, a: usize, b: usize, value: SparseVector) {
        let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
        for (c, v) in value {
            *acc.entry(c).or_insert_with(Rational::zero) += v;
        }
        let v: SparseVector = acc.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        if v.is_empty() {
            self.entries.remove(&(a, b));
        } else {
            self.entries.insert((a, b), v);
        }
    }

    /// Set `[X_a, X_b]` and, by antisymmetry, `[X_b, X_a]`.
    pub fn set_antisymmetric(&mut self, a: usize, b: usize, value: SparseVector) {
        let neg = value.iter().map(|(c, v)| (*c, -v.clone())).collect();
        self.set(a, b, value);
        self.set(b, a, neg);
    }

    pub fn get(&self, a: usize, b: usize) -> &[(usize, Rational)] {
        self.entries.get(&(a, b)).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &SparseVector)> {
        self.entries.iter()
    }

    pub fn is_abelian(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest basis position referenced anywhere in the tensor.
    fn max_index(&self) -> Option<usize> {
        self.entries
            .iter()
            .flat_map(|((a, b), v)| {
                std::iter::once(*a.max(b)).chain(v.iter().map(|(c, _)| *c))
            })
            .max()
    }
}

/// One violated axiom with the witnessing basis labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axiom", rename_all = "snake_case")]
pub enum Violation {
    Antisymmetry { left: Label, right: Label },
    Grading { left: Label, right: Label, output: Label },
    Jacobi { a: Label, b: Label, c: Label, coordinate: Label },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Antisymmetry { left, right } => {
                write!(f, "antisymmetry fails at pair ({left}, {right})")
            }
            Violation::Grading {
                left,
                right,
                output,
            } => write!(
                f,
                "grading fails: [X{left}, X{right}] has support on X{output}"
            ),
            Violation::Jacobi { a, b, c, coordinate } => write!(
                f,
                "Jacobi fails on ({a}, {b}, {c}) at coordinate {coordinate}"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check antisymmetry, grading and the Jacobi identity exactly.
///
/// Structural problems (indices outside the basis) are returned as `Err`,
/// axiom failures are listed in the report.
pub fn validate_algebra(
    basis: &GradedBasis,
    constants: &StructureConstants,
) -> Result<ValidationReport> {
    let q = basis.total_dim();
    if let Some(m) = constants.max_index() {
        if m >= q {
            return Err(Error::DimensionMismatch {
                expected: q,
                found: m + 1,
            });
        }
    }
    let labels = basis.labels();
    let mut violations = Vec::new();

    for a in 0..q {
        for b in a..q {
            let ab = constants.get(a, b);
            let ba = constants.get(b, a);
            let sum = add_sparse(ab, ba);
            if !sum.is_empty() {
                violations.push(Violation::Antisymmetry {
                    left: labels[a],
                    right: labels[b],
                });
            }
        }
    }

    let step = basis.step();
    for ((a, b), v) in constants.iter() {
        let min_level = labels[*a].level + labels[*b].level;
        for (c, _) in v {
            if labels[*c].level < min_level || min_level > step {
                violations.push(Violation::Grading {
                    left: labels[*a],
                    right: labels[*b],
                    output: labels[*c],
                });
            }
        }
    }

    // [a,[b,c]] + [b,[c,a]] + [c,[a,b]] = 0 on every basis triple.
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                let mut total: BTreeMap<usize, Rational> = BTreeMap::new();
                for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
                    let inner = constants.get(y, z);
                    for (i, vi) in inner {
                        for (k, v) in constants.get(x, *i) {
                            *total.entry(*k).or_insert_with(Rational::zero) += vi * v;
                        }
                    }
                }
                if let Some((k, _)) = total.iter().find(|(_, v)| !v.is_zero()) {
                    violations.push(Violation::Jacobi {
                        a: labels[a],
                        b: labels[b],
                        c: labels[c],
                        coordinate: labels[*k],
                    });
                }
            }
        }
    }

    Ok(ValidationReport { violations })
}

fn add_sparse(x: &[(usize, Rational)], y: &[(usize, Rational)]) -> SparseVector {
    let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
    for (c, v) in x.iter().chain(y) {
        *acc.entry(*c).or_insert_with(Rational::zero) += v;
    }
    acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
}

/// A validated graded nilpotent Lie algebra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Algebra {
    basis: GradedBasis,
    constants: StructureConstants,
}

impl Algebra {
    /// Validate and wrap. Any violated axiom is an error.
    pub fn new(basis: GradedBasis, constants: StructureConstants) -> Result<Self> {
        let report = validate_algebra(&basis, &constants)?;
        if let Some(v) = report.violations.first() {
            return Err(Error::Unvalidated(format!(
                "{} violation(s), first: {v}",
                report.violations.len()
            )));
        }
        Ok(Algebra { basis, constants })
    }

    /// Abelian algebra with the given layer dimensions.
    pub fn abelian(dims: Vec<usize>) -> Result<Self> {
        Self::new(GradedBasis::new(dims)?, StructureConstants::new())
    }

    pub fn basis(&self) -> &GradedBasis {
        &self.basis
    }

    pub fn constants(&self) -> &StructureConstants {
        &self.constants
    }

    pub fn step(&self) -> usize {
        self.basis.step()
    }

    pub fn dim(&self) -> usize {
        self.basis.total_dim()
    }

    pub fn zero<S: Ring>(&self) -> LieVector<S> {
        LieVector::zero(self.dim())
    }

    pub fn check_vector<S>(&self, x: &LieVector<S>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Lie bracket `[x, y]` in coordinates.
    pub fn bracket<S: Ring>(&self, x: &LieVector<S>, y: &LieVector<S>) -> Result<LieVector<S>> {
        self.check_vector(x)?;
        self.check_vector(y)?;
        Ok(self.bracket_unchecked(x, y))
    }

    pub(crate) fn bracket_unchecked<S: Ring>(&self, x: &LieVector<S>, y: &LieVector<S>) -> LieVector<S> {
        let mut out = LieVector::zero(self.dim());
        for ((a, b), v) in self.constants.iter() {
            let (xa, yb) = (&x.coords[*a], &y.coords[*b]);
            if xa.is_zero() || yb.is_zero() {
                continue;
            }
            let prod = xa.clone() * yb.clone();
            for (c, coef) in v {
                let term = if coef.is_one() {
                    prod.clone()
                } else if *coef == -Rational::one() {
                    -prod.clone()
                } else {
                    S::from_rational(coef) * prod.clone()
                };
                let cur = std::mem::replace(&mut out.coords[*c], S::zero());
                out.coords[*c] = cur + term;
            }
        }
        out
    }

    /// Level-n slice of `x`.
    pub fn level_slice<'a, S>(&self, x: &'a LieVector<S>, level: usize) -> Result<&'a [S]> {
        if level == 0 || level > self.step() {
            return Err(Error::LevelOutOfRange {
                level,
                step: self.step(),
            });
        }
        Ok(&x.coords[self.basis.level_range(level)])
    }

    /// Whether some bracket of a level-1 vector with a level-(n-1) vector has
    /// a nonzero level-n component.
    pub fn level_generated(&self, n: usize) -> bool {
        if n <= 1 {
            return true;
        }
        self.constants.iter().any(|((a, b), v)| {
            let (la, lb) = (self.basis.level_of(*a), self.basis.level_of(*b));
            ((la == 1 && lb == n - 1) || (lb == 1 && la == n - 1))
                && v.iter().any(|(c, _)| self.basis.level_of(*c) == n)
        })
    }
}

/// Apply the dilation `delta_r`: the level-n slice is multiplied by `r^n`.
pub fn dilate<S: Scalar>(basis: &GradedBasis, r: &S, x: &LieVector<S>) -> Result<LieVector<S>> {
    if !r.is_positive() {
        return Err(Error::NonPositiveDilation);
    }
    if x.len() != basis.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.total_dim(),
            found: x.len(),
        });
    }
    let mut out = x.clone();
    let mut power = S::one();
    for level in 1..=basis.step() {
        power = power * r.clone();
        for c in basis.level_range(level) {
            out.coords[c] = x.coords[c].clone() * power.clone();
        }
    }
    Ok(out)
}

/// Coordinates of a Lie-algebra element in the fixed graded basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LieVector<S> {
    pub coords: Vec<S>,
}

impl<S> LieVector<S> {
    pub fn new(coords: Vec<S>) -> Self {
        LieVector { coords }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.coords
    }
}

impl<S: Ring> LieVector<S> {
    pub fn zero(q: usize) -> Self {
        LieVector {
            coords: vec![S::zero(); q],
        }
    }

    pub fn from_i64(values: &[i64]) -> Self {
        LieVector {
            coords: values.iter().map(|&v| S::from_i64(v)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn neg(&self) -> Self {
        LieVector {
            coords: self.coords.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        LieVector {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        LieVector {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        LieVector {
            coords: self.coords.iter().map(|c| c.clone() * s.clone()).collect(),
        }
    }
}

impl<S: Scalar> LieVector<S> {
    /// Euclidean norm in the fixed basis.
    pub fn norm(&self) -> f64 {
        self.coords
            .iter()
            .map(|c| {
                let v = c.as_f64();
                v * v
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn to_f64(&self) -> LieVector<f64> {
        LieVector {
            coords: self.coords.iter().map(|c| c.as_f64()).collect(),
        }
    }
}

impl LieVector<Rational> {
    pub fn from_ratios(values: &[(i64, i64)]) -> Self {
        LieVector {
            coords: values
                .iter()
                .map(|&(n, d)| crate::scalar::ratio(n, d))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::scalar::{ratio, rint};

    fn heis_basis() -> GradedBasis {
        GradedBasis::new(vec![2, 1]).unwrap()
    }

    #[test]
    fn basis_bookkeeping() {
        let b = GradedBasis::new(vec![3, 2, 1]).unwrap();
        assert_eq!(b.total_dim(), 6);
        assert_eq!(b.homogeneous_dim(), 10);
        assert_eq!(b.level_range(2), 3..5);
        assert_eq!(b.position(Label::new(3, 1)).unwrap(), 5);
        assert!(b.position(Label::new(2, 3)).is_err());
        let mut sorted = b.labels().to_vec();
        sorted.sort();
        assert_eq!(sorted, b.labels());
        assert!(GradedBasis::new(vec![2, 0]).is_err());
        assert!(GradedBasis::new(vec![]).is_err());
    }

    #[test]
    fn heisenberg_is_valid() {
        let entry = catalog::heisenberg3();
        let report =
            validate_algebra(entry.algebra.basis(), entry.algebra.constants()).unwrap();
        assert!(report.is_valid(), "{report:?}");
    }

    #[test]
    fn broken_antisymmetry_is_reported() {
        let mut c = StructureConstants::new();
        c.set(0, 1, vec![(2, rint(1))]);
        c.set(1, 0, vec![(2, rint(1))]);
        let report = validate_algebra(&heis_basis(), &c).unwrap();
        assert!(report.violations.contains(&Violation::Antisymmetry {
            left: Label::new(1, 1),
            right: Label::new(1, 2)
        }));
        assert!(Algebra::new(heis_basis(), c).is_err());
    }

    #[test]
    fn grading_and_structure_errors() {
        let mut c = StructureConstants::new();
        // [X_{1,1}, X_{1,2}] landing on level 1 breaks the grading
        c.set_antisymmetric(0, 1, vec![(0, rint(1))]);
        let report = validate_algebra(&heis_basis(), &c).unwrap();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Grading { .. })));

        let mut bad = StructureConstants::new();
        bad.set_antisymmetric(0, 1, vec![(7, rint(1))]);
        assert!(matches!(
            validate_algebra(&heis_basis(), &bad),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn jacobi_failure_is_detected() {
        // [X1,X2] = Y, [X3,Y] = Z and nothing else: the cyclic sum on
        // (X1, X2, X3) is [X3, Y] = Z.
        let basis = GradedBasis::new(vec![3, 1, 1]).unwrap();
        let mut c = StructureConstants::new();
        c.set_antisymmetric(0, 1, vec![(3, rint(1))]);
        c.set_antisymmetric(2, 3, vec![(4, rint(1))]);
        let report = validate_algebra(&basis, &c).unwrap();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Jacobi { .. })));
    }

    #[test]
    fn heisenberg_bracket_examples() {
        let h = catalog::heisenberg3().algebra;
        let x = LieVector::<Rational>::from_i64(&[1, 0, 0]);
        let y = LieVector::<Rational>::from_i64(&[0, 1, 0]);
        assert_eq!(h.bracket(&x, &y).unwrap(), LieVector::from_i64(&[0, 0, 1]));
        let z = LieVector::<Rational>::from_ratios(&[(3, 2), (-1, 5), (7, 1)]);
        assert!(h.bracket(&z, &z).unwrap().is_zero());
        let short = LieVector::<Rational>::from_i64(&[1, 0]);
        assert!(h.bracket(&short, &x).is_err());
    }

    #[test]
    fn dilation_examples() {
        let h = catalog::heisenberg3().algebra;
        let x = LieVector::<Rational>::from_i64(&[1, 1, 1]);
        assert_eq!(
            dilate(h.basis(), &rint(2), &x).unwrap(),
            LieVector::from_i64(&[2, 2, 4])
        );
        assert_eq!(dilate(h.basis(), &rint(1), &x).unwrap(), x);
        assert!(matches!(
            dilate(h.basis(), &rint(0), &x),
            Err(Error::NonPositiveDilation)
        ));
        assert!(dilate(h.basis(), &ratio(-1, 2), &x).is_err());

        let f = catalog::free2step3().algebra;
        let y = LieVector::<Rational>::from_i64(&[1, 0, 1, 1, 0]);
        assert_eq!(
            dilate(f.basis(), &rint(3), &y).unwrap(),
            LieVector::from_i64(&[3, 0, 9, 27, 0])
        );
        let levels: Vec<usize> = f.basis().labels().iter().map(|l| l.level).collect();
        assert_eq!(levels, vec![1, 1, 2, 3, 3]);
    }

    #[test]
    fn level_generation() {
        let f = catalog::free2step3().algebra;
        assert!(f.level_generated(2) && f.level_generated(3));
        let a = Algebra::abelian(vec![2, 1]).unwrap();
        assert!(!a.level_generated(2));
    }
}
