//! Exact unipotent-matrix model of the catalog groups, used as an
//! independent check on the group law.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, LieVector};
use crate::catalog::{upper_triangular_positions, GroupCatalogEntry, OracleKind};
use crate::error::{Error, Result};
use crate::bch::GroupLawTable;
use crate::scalar::{ratio, rint, Rational};

/// Dense square matrix with exact rational entries.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMatrix {
    n: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zero(n: usize) -> Self {
        RationalMatrix {
            n,
            data: vec![Rational::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.data[i * n + i] = Rational::one();
        }
        m
    }

    pub fn elementary(n: usize, r: usize, c: usize) -> Self {
        let mut m = Self::zero(n);
        m.data[r * n + c] = Rational::one();
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.data[r * self.n + c] = v;
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zero(n);
        for i in 0..n {
            for k in 0..n {
                let a = &self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &other.data[k * n + j];
                    if !b.is_zero() {
                        out.data[i * n + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        RationalMatrix { n: self.n, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        RationalMatrix { n: self.n, data }
    }

    pub fn scale(&self, s: &Rational) -> Self {
        let data = self.data.iter().map(|a| a * s).collect();
        RationalMatrix { n: self.n, data }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Diagonal all ones, strictly-lower part zero.
    pub fn is_upper_unipotent(&self) -> bool {
        (0..self.n).all(|r| {
            (0..=r).all(|c| {
                let v = self.get(r, c);
                if r == c {
                    v.is_one()
                } else {
                    v.is_zero()
                }
            })
        })
    }

    /// `exp(N)` for nilpotent `N`; the series stops at the first zero power.
    pub fn exp_nilpotent(&self) -> Self {
        let mut out = Self::identity(self.n);
        let mut power = self.clone();
        let mut k = 1i64;
        while !power.is_zero() {
            out = out.add(&power);
            k += 1;
            power = power.mul(self).scale(&Rational::new(1.into(), k.into()));
            if k as usize > self.n + 1 {
                break;
            }
        }
        out
    }

    /// `log(U)` for unipotent `U`, finite because `U - I` is nilpotent.
    pub fn log_unipotent(&self) -> Self {
        let nil = self.sub(&Self::identity(self.n));
        let mut out = Self::zero(self.n);
        let mut power = nil.clone();
        let mut k = 1i64;
        while !power.is_zero() && (k as usize) <= self.n {
            let sign = if k % 2 == 1 { 1 } else { -1 };
            out = out.add(&power.scale(&Rational::new(sign.into(), k.into())));
            power = power.mul(&nil);
            k += 1;
        }
        out
    }
}

/// Images of the basis vectors in a faithful nilpotent matrix algebra.
#[derive(Debug, Clone)]
pub struct MatrixEmbedding {
    images: Vec<RationalMatrix>,
    /// Entry positions whose restriction of the images is invertible.
    pivots: Vec<usize>,
    /// Inverse of the `q x q` block `images[k].entries()[pivots[r]]`.
    pivot_inverse: Vec<Vec<Rational>>,
}

impl MatrixEmbedding {
    pub fn new(algebra: &Algebra, images: Vec<RationalMatrix>) -> Result<Self> {
        let q = algebra.dim();
        if images.len() != q {
            return Err(Error::DimensionMismatch {
                expected: q,
                found: images.len(),
            });
        }
        // the map must respect brackets
        for a in 0..q {
            for b in 0..q {
                let lhs = images[a].commutator(&images[b]);
                let mut rhs = RationalMatrix::zero(images[0].dim());
                for (k, c) in algebra.constants().get(a, b) {
                    rhs = rhs.add(&images[*k].scale(c));
                }
                if lhs != rhs {
                    return Err(Error::NoOracle(format!(
                        "matrix images do not satisfy bracket ({a},{b})"
                    )));
                }
            }
        }
        let (pivots, pivot_inverse) = pivot_block(&images)?;
        Ok(MatrixEmbedding {
            images,
            pivots,
            pivot_inverse,
        })
    }

    pub fn matrix_dim(&self) -> usize {
        self.images[0].dim()
    }

    pub fn image(&self, x: &LieVector<Rational>) -> RationalMatrix {
        let mut m = RationalMatrix::zero(self.matrix_dim());
        for (c, img) in x.coords.iter().zip(&self.images) {
            if !c.is_zero() {
                m = m.add(&img.scale(c));
            }
        }
        m
    }

    /// Coordinates of a matrix in the span of the images.
    pub fn read_back(&self, m: &RationalMatrix) -> Result<LieVector<Rational>> {
        let q = self.images.len();
        let rhs: Vec<&Rational> = self.pivots.iter().map(|&p| &m.entries()[p]).collect();
        let coords: Vec<Rational> = (0..q)
            .map(|k| {
                self.pivot_inverse[k]
                    .iter()
                    .zip(&rhs)
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * *b)
            })
            .collect();
        let x = LieVector::new(coords);
        if self.image(&x) != *m {
            return Err(Error::NoOracle("matrix is outside the embedded algebra".into()));
        }
        Ok(x)
    }

    pub fn group_element(&self, x: &LieVector<Rational>) -> RationalMatrix {
        self.image(x).exp_nilpotent()
    }
}

/// Pick `q` entry positions on which the images are linearly independent
/// and invert that block exactly.
fn pivot_block(images: &[RationalMatrix]) -> Result<(Vec<usize>, Vec<Vec<Rational>>)> {
    let q = images.len();
    let entries = images[0].entries().len();
    // rows: entries, columns: images; row-reduce greedily
    let mut basis_rows: Vec<Vec<Rational>> = Vec::new();
    let mut pivots = Vec::new();
    let mut reduced: Vec<(usize, Vec<Rational>)> = Vec::new();
    for e in 0..entries {
        let mut row: Vec<Rational> = images.iter().map(|m| m.entries()[e].clone()).collect();
        for (col, r) in &reduced {
            if !row[*col].is_zero() {
                let f = row[*col].clone() / &r[*col];
                for (x, y) in row.iter_mut().zip(r) {
                    *x -= &f * y;
                }
            }
        }
        if let Some(col) = row.iter().position(|v| !v.is_zero()) {
            reduced.push((col, row));
            pivots.push(e);
            basis_rows.push(images.iter().map(|m| m.entries()[e].clone()).collect());
            if pivots.len() == q {
                break;
            }
        }
    }
    if pivots.len() < q {
        return Err(Error::NoOracle("matrix images are linearly dependent".into()));
    }
    let inverse = invert(basis_rows).ok_or_else(|| Error::NoOracle("singular pivot block".into()))?;
    Ok((pivots, inverse))
}

/// Gauss-Jordan inverse of a square rational matrix given by rows.
pub fn invert(mut a: Vec<Vec<Rational>>) -> Option<Vec<Vec<Rational>>> {
    let n = a.len();
    let mut inv: Vec<Vec<Rational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { rint(1) } else { rint(0) }).collect())
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, p);
        inv.swap(col, p);
        let d = a[col][col].clone();
        for j in 0..n {
            a[col][j] = &a[col][j] / &d;
            inv[col][j] = &inv[col][j] / &d;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in 0..n {
                    let (ac, ic) = (a[col][j].clone(), inv[col][j].clone());
                    a[r][j] -= &f * ac;
                    inv[r][j] -= &f * ic;
                }
            }
        }
    }
    Some(inv)
}

/// Left multiplication by each generator on the tensor algebra over `d`
/// letters, truncated above word length `depth`.
fn truncated_tensor_generators(d: usize, depth: usize) -> (usize, Vec<RationalMatrix>) {
    // words of length 0..=depth, numbered in order of length then lex
    let mut offsets = vec![0usize];
    for l in 0..=depth {
        offsets.push(offsets[l] + d.pow(l as u32));
    }
    let dim = offsets[depth + 1];
    let gens = (0..d)
        .map(|letter| {
            let mut m = RationalMatrix::zero(dim);
            for l in 0..depth {
                for w in 0..d.pow(l as u32) {
                    // letter * word: prepend letter
                    let target = offsets[l + 1] + letter * d.pow(l as u32) + w;
                    m.set(target, offsets[l] + w, rint(1));
                }
            }
            m
        })
        .collect();
    (dim, gens)
}

/// Build the embedding for a catalog entry.
pub fn embedding_for(entry: &GroupCatalogEntry) -> Result<MatrixEmbedding> {
    let alg = &entry.algebra;
    match entry.oracle {
        Some(OracleKind::UpperTriangular(n)) => {
            let positions = upper_triangular_positions(&entry.name)
                .ok_or_else(|| Error::NoOracle(entry.name.clone()))?;
            let images = positions
                .iter()
                .map(|&(r, c)| RationalMatrix::elementary(n, r, c))
                .collect();
            MatrixEmbedding::new(alg, images)
        }
        Some(OracleKind::TruncatedTensor) => tensor_embedding(alg),
        None => Err(Error::NoOracle(entry.name.clone())),
    }
}

/// Level-1 basis vectors map to the generators; each higher basis vector
/// must appear as a single-term bracket `[X_a, X_b] = c X_k` of already
/// mapped vectors.
pub fn tensor_embedding(alg: &Algebra) -> Result<MatrixEmbedding> {
    let basis = alg.basis();
    let d1 = basis.dim_of_level(1);
    let (_, gens) = truncated_tensor_generators(d1, alg.step());
    let mut images: Vec<Option<RationalMatrix>> = vec![None; alg.dim()];
    for (k, g) in gens.into_iter().enumerate() {
        images[k] = Some(g);
    }
    for level in 2..=alg.step() {
        for k in basis.level_range(level) {
            let found = alg.constants().iter().find_map(|((a, b), out)| {
                if out.len() == 1 && out[0].0 == k {
                    let ia = images[*a].as_ref()?;
                    let ib = images[*b].as_ref()?;
                    Some(ia.commutator(ib).scale(&(Rational::one() / &out[0].1)))
                } else {
                    None
                }
            });
            images[k] = Some(found.ok_or_else(|| {
                Error::NoOracle(format!("basis vector {} is not a single bracket", basis.labels()[k]))
            })?);
        }
    }
    MatrixEmbedding::new(alg, images.into_iter().map(Option::unwrap).collect())
}

/// Product of `xs` computed through exact matrix exponentials and logarithm.
pub fn matrix_oracle_product(
    entry: &GroupCatalogEntry,
    xs: &[LieVector<Rational>],
) -> Result<LieVector<Rational>> {
    let emb = embedding_for(entry)?;
    oracle_product_with(&emb, &entry.algebra, xs)
}

pub fn oracle_product_with(
    emb: &MatrixEmbedding,
    alg: &Algebra,
    xs: &[LieVector<Rational>],
) -> Result<LieVector<Rational>> {
    if xs.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut acc = RationalMatrix::identity(emb.matrix_dim());
    for x in xs {
        alg.check_vector(x)?;
        acc = acc.mul(&emb.group_element(x));
    }
    emb.read_back(&acc.log_unipotent())
}

/// Outcome of comparing the group law with the matrix oracle on random
/// rational pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleAgreement {
    pub samples: usize,
    pub mismatches: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl OracleAgreement {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

/// Random point with coordinates `a / b`, `|a| <= 9`, `1 <= b <= 6`.
pub fn random_rational_vector<R: Rng + ?Sized>(rng: &mut R, q: usize) -> LieVector<Rational> {
    LieVector::new(
        (0..q)
            .map(|_| ratio(rng.random_range(-9..=9), rng.random_range(1..=6)))
            .collect(),
    )
}

pub fn oracle_agreement(
    entry: &GroupCatalogEntry,
    table: &GroupLawTable,
    samples: usize,
    seed: u64,
) -> Result<OracleAgreement> {
    let emb = embedding_for(entry)?;
    let law = table.compile::<Rational>();
    let q = entry.algebra.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0;
    let mut witness = None;
    for _ in 0..samples {
        let x = random_rational_vector(&mut rng, q);
        let y = random_rational_vector(&mut rng, q);
        let fast = law.multiply(&x, &y)?;
        let slow = oracle_product_with(&emb, &entry.algebra, &[x.clone(), y.clone()])?;
        if fast != slow {
            mismatches += 1;
            witness.get_or_insert_with(|| format!("x = {:?}, y = {:?}: law {:?}, oracle {:?}", x, y, fast, slow));
        }
    }
    Ok(OracleAgreement {
        samples,
        mismatches,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn heisenberg_exp_matches_closed_form() {
        let e = catalog::heisenberg3();
        let emb = embedding_for(&e).unwrap();
        let x = LieVector::<Rational>::from_ratios(&[(2, 1), (3, 1), (5, 1)]);
        let m = emb.group_element(&x);
        assert!(m.is_upper_unipotent());
        // rows (1,a,c+ab/2),(0,1,b),(0,0,1)
        assert_eq!(m.get(0, 1), &rint(2));
        assert_eq!(m.get(1, 2), &rint(3));
        assert_eq!(m.get(0, 2), &rint(8));
        assert_eq!(emb.read_back(&m.log_unipotent()).unwrap(), x);
    }

    #[test]
    fn oracle_examples() {
        let e = catalog::heisenberg3();
        let z = matrix_oracle_product(
            &e,
            &[LieVector::from_i64(&[1, 0, 0]), LieVector::from_i64(&[0, 1, 0])],
        )
        .unwrap();
        assert_eq!(z, LieVector::from_ratios(&[(1, 1), (1, 1), (1, 2)]));
        let zero = LieVector::<Rational>::zero(3);
        assert!(matrix_oracle_product(&e, &[zero.clone(), zero]).unwrap().is_zero());
        let z = matrix_oracle_product(
            &e,
            &[
                LieVector::from_i64(&[1, 0, 0]),
                LieVector::from_i64(&[0, 1, 0]),
                LieVector::from_i64(&[-1, 0, 0]),
            ],
        )
        .unwrap();
        assert_eq!(z, LieVector::from_i64(&[0, 1, 1]));
    }

    #[test]
    fn free_algebra_embedding_is_faithful() {
        let e = catalog::free2step3();
        let emb = embedding_for(&e).unwrap();
        assert_eq!(emb.matrix_dim(), 15);
        let x = LieVector::<Rational>::from_ratios(&[(1, 2), (-1, 3), (2, 1), (1, 1), (-3, 4)]);
        assert_eq!(emb.read_back(&emb.image(&x)).unwrap(), x);
        assert_eq!(emb.read_back(&emb.group_element(&x).log_unipotent()).unwrap(), x);
    }

    #[test]
    fn non_free_algebra_has_no_tensor_oracle() {
        // ut4 is not free: [E12, E34] = 0 but the tensor images do not commute
        let alg = catalog::ut4().algebra;
        assert!(matches!(tensor_embedding(&alg), Err(Error::NoOracle(_))));
    }

    #[test]
    fn readback_rejects_foreign_matrix() {
        let emb = embedding_for(&catalog::heisenberg3()).unwrap();
        let m = RationalMatrix::elementary(3, 0, 0);
        assert!(emb.read_back(&m).is_err());
    }

    #[test]
    fn random_pairs_agree() {
        for e in [catalog::heisenberg3(), catalog::ut4(), catalog::free2step3()] {
            let t = crate::bch::build_group_law(&e.algebra).unwrap();
            let r = oracle_agreement(&e, &t, 50, 7).unwrap();
            assert!(r.passed(), "{}: {:?}", e.name, r.witness);
            assert_eq!(r.samples, 50);
        }
    }

    #[test]
    fn invert_small() {
        let a = vec![vec![rint(2), rint(1)], vec![rint(1), rint(1)]];
        let inv = invert(a).unwrap();
        assert_eq!(inv, vec![vec![rint(1), rint(-1)], vec![rint(-1), rint(2)]]);
        assert!(invert(vec![vec![rint(1), rint(2)], vec![rint(2), rint(4)]]).is_none());
    }
}
