//! Named example groups and the JSON loader for custom algebras.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::algebra::{validate_algebra, Algebra, GradedBasis, Label, StructureConstants, ValidationReport};
use crate::error::{Error, Result};
use crate::scalar::{rint, Rational};

pub const CATALOG_NAMES: [&str; 3] = ["heisenberg3", "ut4", "free2step3"];

/// Which exact unipotent representation backs the matrix oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    /// Strictly upper-triangular `n x n` matrices, basis mapped to `E_{ab}`.
    UpperTriangular(usize),
    /// Left-regular action on the tensor algebra over the level-1 generators,
    /// truncated above word length `step`. Faithful for free nilpotent
    /// algebras in a Hall basis.
    TruncatedTensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupCatalogEntry {
    pub name: String,
    pub algebra: Algebra,
    /// Size of the unipotent matrices used by the oracle.
    pub matrix_dim: Option<usize>,
    pub oracle: Option<OracleKind>,
}

pub fn lookup(name: &str) -> Option<GroupCatalogEntry> {
    match name {
        "heisenberg3" => Some(heisenberg3()),
        "ut4" => Some(ut4()),
        "free2step3" => Some(free2step3()),
        _ => None,
    }
}

/// `[X, Y] = Z` on dims `[2, 1]`.
pub fn heisenberg3() -> GroupCatalogEntry {
    let basis = GradedBasis::new(vec![2, 1]).unwrap();
    let mut c = StructureConstants::new();
    c.set_antisymmetric(0, 1, vec![(2, rint(1))]);
    GroupCatalogEntry {
        name: "heisenberg3".into(),
        algebra: Algebra::new(basis, c).expect("heisenberg3 constants"),
        matrix_dim: Some(3),
        oracle: Some(OracleKind::UpperTriangular(3)),
    }
}

/// Strictly upper-triangular 4x4 matrices with basis
/// `E12, E23, E34 | E13, E24 | E14`.
pub fn ut4() -> GroupCatalogEntry {
    let basis = GradedBasis::new(vec![3, 2, 1]).unwrap();
    // positions: E12=0 E23=1 E34=2 E13=3 E24=4 E14=5
    let mut c = StructureConstants::new();
    c.set_antisymmetric(0, 1, vec![(3, rint(1))]); // [E12,E23] = E13
    c.set_antisymmetric(1, 2, vec![(4, rint(1))]); // [E23,E34] = E24
    c.set_antisymmetric(0, 4, vec![(5, rint(1))]); // [E12,E24] = E14
    c.set_antisymmetric(3, 2, vec![(5, rint(1))]); // [E13,E34] = E14
    GroupCatalogEntry {
        name: "ut4".into(),
        algebra: Algebra::new(basis, c).expect("ut4 constants"),
        matrix_dim: Some(4),
        oracle: Some(OracleKind::UpperTriangular(4)),
    }
}

/// Free 2-generator step-3 algebra in the Hall basis
/// `X1, X2 | [X1,X2] | [[X1,X2],X1], [[X1,X2],X2]`.
pub fn free2step3() -> GroupCatalogEntry {
    let basis = GradedBasis::new(vec![2, 1, 2]).unwrap();
    let mut c = StructureConstants::new();
    c.set_antisymmetric(0, 1, vec![(2, rint(1))]);
    c.set_antisymmetric(2, 0, vec![(3, rint(1))]);
    c.set_antisymmetric(2, 1, vec![(4, rint(1))]);
    GroupCatalogEntry {
        name: "free2step3".into(),
        algebra: Algebra::new(basis, c).expect("free2step3 constants"),
        matrix_dim: Some(15),
        oracle: Some(OracleKind::TruncatedTensor),
    }
}

/// Matrix position of each basis vector for the upper-triangular embeddings.
pub fn upper_triangular_positions(name: &str) -> Option<Vec<(usize, usize)>> {
    match name {
        "heisenberg3" => Some(vec![(0, 1), (1, 2), (0, 2)]),
        "ut4" => Some(vec![(0, 1), (1, 2), (2, 3), (0, 2), (1, 3), (0, 3)]),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientDoc {
    pub label: [usize; 2],
    pub num: i64,
    pub den: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketDoc {
    pub left: [usize; 2],
    pub right: [usize; 2],
    pub out: Vec<CoefficientDoc>,
}

/// JSON document describing a custom graded algebra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraDoc {
    pub step: usize,
    pub dims: Vec<usize>,
    #[serde(default)]
    pub brackets: Vec<BracketDoc>,
}

impl AlgebraDoc {
    /// Parse into basis and constants without checking the axioms.
    ///
    /// A listed pair whose reverse is not listed gets the antisymmetric value
    /// filled in; when both orders are listed both are kept verbatim.
    pub fn to_parts(&self) -> Result<(GradedBasis, StructureConstants)> {
        if self.step != self.dims.len() {
            return Err(Error::InvalidBasis(format!(
                "step {} does not match {} layer dims",
                self.step,
                self.dims.len()
            )));
        }
        let basis = GradedBasis::new(self.dims.clone())?;
        let pos = |l: [usize; 2]| basis.position(Label::new(l[0], l[1]));
        let mut listed = BTreeSet::new();
        let mut parsed = Vec::new();
        for b in &self.brackets {
            let (a, c) = (pos(b.left)?, pos(b.right)?);
            let mut value = Vec::new();
            for o in &b.out {
                if o.den == 0 {
                    return Err(Error::Parse("zero denominator".into()));
                }
                value.push((
                    pos(o.label)?,
                    Rational::new(BigInt::from(o.num), BigInt::from(o.den)),
                ));
            }
            listed.insert((a, c));
            parsed.push((a, c, value));
        }
        let mut constants = StructureConstants::new();
        for (a, c, value) in parsed {
            if listed.contains(&(c, a)) {
                constants.set(a, c, value);
            } else {
                constants.set_antisymmetric(a, c, value);
            }
        }
        Ok((basis, constants))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Parse and validate; returns the report when axioms fail.
pub fn load_algebra(text: &str) -> Result<std::result::Result<Algebra, ValidationReport>> {
    let doc = AlgebraDoc::from_json(text)?;
    let (basis, constants) = doc.to_parts()?;
    let report = validate_algebra(&basis, &constants)?;
    if report.is_valid() {
        Ok(Ok(Algebra::new(basis, constants)?))
    } else {
        Ok(Err(report))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::LieVector;
    use crate::oracle::RationalMatrix;

    #[test]
    fn catalog_invariants() {
        let expect = [
            ("heisenberg3", 2, vec![2, 1], 3, 4),
            ("ut4", 3, vec![3, 2, 1], 6, 10),
            ("free2step3", 3, vec![2, 1, 2], 5, 10),
        ];
        for (name, s, dims, q, d) in expect {
            let e = lookup(name).unwrap();
            let b = e.algebra.basis();
            assert_eq!(b.step(), s);
            assert_eq!(b.dims(), dims.as_slice());
            assert_eq!(b.total_dim(), q);
            assert_eq!(b.homogeneous_dim(), d);
            let report = validate_algebra(b, e.algebra.constants()).unwrap();
            assert!(report.is_valid(), "{name}: {report:?}");
        }
        assert!(lookup("sl2").is_none());
    }

    /// Read the ut4 tensor off elementary-matrix commutators.
    #[test]
    fn ut4_constants_match_matrix_commutators() {
        let e = ut4();
        let positions = upper_triangular_positions("ut4").unwrap();
        let mats: Vec<RationalMatrix> = positions
            .iter()
            .map(|&(r, c)| RationalMatrix::elementary(4, r, c))
            .collect();
        for a in 0..6 {
            for b in 0..6 {
                let comm = mats[a].mul(&mats[b]).sub(&mats[b].mul(&mats[a]));
                let mut expected = LieVector::<Rational>::zero(6);
                for (k, &(r, c)) in positions.iter().enumerate() {
                    expected.coords[k] = comm.get(r, c).clone();
                }
                let mut x = LieVector::<Rational>::zero(6);
                let mut y = LieVector::<Rational>::zero(6);
                x.coords[a] = rint(1);
                y.coords[b] = rint(1);
                assert_eq!(e.algebra.bracket(&x, &y).unwrap(), expected, "pair {a},{b}");
            }
        }
        // E12, E23 -> E13
        let x = LieVector::<Rational>::from_i64(&[1, 0, 0, 0, 0, 0]);
        let y = LieVector::<Rational>::from_i64(&[0, 1, 0, 0, 0, 0]);
        assert_eq!(
            e.algebra.bracket(&x, &y).unwrap(),
            LieVector::from_i64(&[0, 0, 0, 1, 0, 0])
        );
    }

    #[test]
    fn json_loader_round_trip() {
        let text = r#"{"step":2,"dims":[2,1],"brackets":[
            {"left":[1,1],"right":[1,2],"out":[{"label":[2,1],"num":1,"den":1}]}]}"#;
        let alg = load_algebra(text).unwrap().unwrap();
        assert_eq!(alg, heisenberg3().algebra);
    }

    #[test]
    fn json_loader_reports_broken_antisymmetry() {
        let text = r#"{"step":2,"dims":[2,1],"brackets":[
            {"left":[1,1],"right":[1,2],"out":[{"label":[2,1],"num":1,"den":1}]},
            {"left":[1,2],"right":[1,1],"out":[{"label":[2,1],"num":1,"den":1}]}]}"#;
        let report = load_algebra(text).unwrap().unwrap_err();
        assert!(!report.is_valid());
        let bad = r#"{"step":2,"dims":[2,1],"brackets":[
            {"left":[1,1],"right":[1,3],"out":[]}]}"#;
        assert!(load_algebra(bad).is_err());
        assert!(load_algebra(r#"{"step":3,"dims":[2,1]}"#).is_err());
    }
}
