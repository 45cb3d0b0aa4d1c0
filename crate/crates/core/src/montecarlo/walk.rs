//! Random walks `Pi(x_1..x_N)`, their test-function functionals and
//! characteristic functions.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::Zero;
use rand::Rng;

use super::estimate::{ComplexEstimate, EstimateWithError};
use super::rng::{accumulate, StreamKey};
use super::testfn::{sample_bump, TestFunctionSpec};
use crate::algebra::GradedBasis;
use crate::bch::Law;
use crate::error::{Error, Result};
use crate::measures::{MeasureSpec, Sampler};
use crate::rearrange::full_alternating_sum;
use crate::scalar::{rational_to_f64, Rational};
use crate::LieVector;

/// Largest `|atoms|^N` for brute-force enumeration.
pub const ENUMERATION_LIMIT: f64 = 1e6;
/// Largest number of distinct lower-level states kept by the exact
/// characteristic-function recursion.
pub const STATE_LIMIT: usize = 2_000_000;

pub fn e(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-level factors `r^level` for the dilation `delta_r`.
pub fn dilation_factors(basis: &GradedBasis, r: f64) -> Vec<f64> {
    (0..basis.total_dim()).map(|c| r.powi(basis.level_of(c) as i32)).collect()
}

/// `xi^{(n)} = eta^{(n)} N^{-n/2}`.
pub fn scaled_frequency(basis: &GradedBasis, eta: &[f64], n: usize) -> Vec<f64> {
    dilation_factors(basis, (n as f64).powf(-0.5))
        .iter()
        .zip(eta)
        .map(|(f, v)| f * v)
        .collect()
}

/// Buffers for one walk.
#[derive(Debug, Clone)]
pub struct WalkBuffers {
    pub acc: Vec<f64>,
    pub draw: Vec<f64>,
    pub scratch: Vec<f64>,
}

impl WalkBuffers {
    pub fn new(q: usize) -> Self {
        WalkBuffers {
            acc: vec![0.0; q],
            draw: vec![0.0; q],
            scratch: vec![0.0; q],
        }
    }
}

/// `acc <- x_1 * ... * x_n` with fresh draws from `sampler`.
pub fn walk<R: Rng + ?Sized>(law: &Law<f64>, sampler: &Sampler, n: usize, rng: &mut R, b: &mut WalkBuffers) {
    b.acc.iter_mut().for_each(|v| *v = 0.0);
    for _ in 0..n {
        sampler.sample_into(rng, &mut b.draw);
        law.right_multiply_in_place(&mut b.acc, &b.draw, &mut b.scratch);
    }
}

/// Everything needed to evaluate `f(g * delta(Pi) * h)` for one measure.
#[derive(Debug, Clone)]
pub struct WalkSetup {
    pub law: Law<f64>,
    pub sampler: Sampler,
    pub f: TestFunctionSpec,
    pub g: Option<Vec<f64>>,
    pub h: Option<Vec<f64>>,
    pub scaled: bool,
}

impl WalkSetup {
    pub fn new(law: Law<f64>, mu: &MeasureSpec, f: TestFunctionSpec) -> Result<Self> {
        mu.check_dim(law.algebra().basis())?;
        f.validate()?;
        Ok(WalkSetup {
            sampler: mu.sampler()?,
            law,
            f,
            g: None,
            h: None,
            scaled: true,
        })
    }

    pub fn translated(mut self, g: Option<Vec<f64>>, h: Option<Vec<f64>>) -> Result<Self> {
        let q = self.law.dim();
        for v in g.iter().chain(h.iter()) {
            if v.len() != q {
                return Err(Error::DimensionMismatch {
                    expected: q,
                    found: v.len(),
                });
            }
        }
        self.g = g;
        self.h = h;
        Ok(self)
    }

    pub fn unscaled(mut self) -> Self {
        self.scaled = false;
        self
    }

    /// One draw of the integrand for walk length `n`.
    pub fn integrand<R: Rng + ?Sized>(&self, n: usize, factors: &[f64], t: Option<f64>, rng: &mut R, b: &mut WalkBuffers) -> f64 {
        walk(&self.law, &self.sampler, n, rng, b);
        if self.scaled {
            b.acc.iter_mut().zip(factors).for_each(|(v, f)| *v *= f);
        }
        if let Some(g) = &self.g {
            // g * acc
            b.draw.copy_from_slice(g);
            self.law.right_multiply_in_place(&mut b.draw, &b.acc, &mut b.scratch);
            b.acc.copy_from_slice(&b.draw);
        }
        if let Some(h) = &self.h {
            self.law.right_multiply_in_place(&mut b.acc, h, &mut b.scratch);
        }
        if let Some(t) = t {
            sample_bump(rng, &mut b.draw);
            b.acc.iter_mut().zip(&b.draw).for_each(|(v, z)| *v -= z / t);
        }
        self.f.eval(&b.acc)
    }
}

/// Monte Carlo estimate of `E f(g * delta_{N^{-1/2}}(Pi) * h)` (or the
/// unscaled version), samples `0..samples` of `key`.
pub fn walk_functional(setup: &WalkSetup, n: usize, key: StreamKey, samples: u64, seed: u64) -> EstimateWithError {
    let acc = walk_functional_acc(setup, n, key, 0, samples);
    acc.estimate(seed)
}

pub(crate) fn walk_functional_acc(
    setup: &WalkSetup,
    n: usize,
    key: StreamKey,
    start: u64,
    samples: u64,
) -> super::estimate::Accumulator {
    let basis = setup.law.algebra().basis();
    let q = basis.total_dim();
    let factors = dilation_factors(basis, (n as f64).powf(-0.5));
    let t = setup.f.smoothing_scale(q, n, basis.homogeneous_dim());
    accumulate(
        key,
        start,
        samples,
        1,
        || WalkBuffers::new(q),
        |rng, b, out| out[0] = setup.integrand(n, &factors, t, rng, b),
    )[0]
}

/// Monte Carlo estimate of `chi_N(xi) = E e(xi . Pi)`.
pub fn char_fn_estimate(
    law: &Law<f64>,
    sampler: &Sampler,
    n: usize,
    xi: &[f64],
    key: StreamKey,
    samples: u64,
    seed: u64,
) -> ComplexEstimate {
    let a = char_fn_acc(law, sampler, n, xi, key, 0, samples);
    ComplexEstimate {
        re: a[0].estimate(seed),
        im: a[1].estimate(seed),
    }
}

pub(crate) fn char_fn_acc(
    law: &Law<f64>,
    sampler: &Sampler,
    n: usize,
    xi: &[f64],
    key: StreamKey,
    start: u64,
    samples: u64,
) -> Vec<super::estimate::Accumulator> {
    let q = law.dim();
    accumulate(
        key,
        start,
        samples,
        2,
        || WalkBuffers::new(q),
        |rng, b, out| {
            walk(law, sampler, n, rng, b);
            let z = e(dot(xi, &b.acc));
            out[0] = z.re;
            out[1] = z.im;
        },
    )
}

/// `chi_N(xi)` for a finitely supported measure by summing over all
/// `|atoms|^N` strings.
pub fn enumerate_char_fn(law: &Law<f64>, atoms: &[Vec<f64>], weights: &[f64], n: usize, xi: &[f64]) -> Result<Complex64> {
    if (atoms.len() as f64).powi(n as i32) > ENUMERATION_LIMIT {
        return Err(Error::ResourceExhausted {
            stored: atoms.len().saturating_pow(n as u32),
            cap: ENUMERATION_LIMIT as usize,
        });
    }
    let q = law.dim();
    let mut idx = vec![0usize; n];
    let mut total = Complex64::zero();
    let mut b = WalkBuffers::new(q);
    loop {
        b.acc.iter_mut().for_each(|v| *v = 0.0);
        let mut w = 1.0;
        for &i in &idx {
            w *= weights[i];
            law.right_multiply_in_place(&mut b.acc, &atoms[i], &mut b.scratch);
        }
        total += e(dot(xi, &b.acc)) * w;
        let mut k = 0;
        loop {
            if k == n {
                return Ok(total);
            }
            idx[k] += 1;
            if idx[k] < atoms.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// `chi_N(xi)` for a finitely supported measure, exactly up to the final
/// floating-point phases.
///
/// The top level is central, so `Pi_k = Pi_{k-1} * x_k` changes it by an
/// amount depending only on the lower levels of `Pi_{k-1}`. The recursion
/// keeps a complex amplitude per exact lower-level state.
pub fn exact_char_fn(
    law: &Law<Rational>,
    atoms: &[Vec<Rational>],
    weights: &[Rational],
    n: usize,
    xi: &[f64],
) -> Result<Complex64> {
    let basis = law.algebra().basis();
    let q = basis.total_dim();
    let low = basis.level_range(basis.step()).start;
    let w: Vec<f64> = weights.iter().map(rational_to_f64).collect();
    let mut states: BTreeMap<Vec<Rational>, Complex64> = BTreeMap::new();
    states.insert(vec![Rational::zero(); low], Complex64::new(1.0, 0.0));
    let mut full = Vec::with_capacity(q);
    let mut out = Vec::with_capacity(q);
    for _ in 0..n {
        let mut next: BTreeMap<Vec<Rational>, Complex64> = BTreeMap::new();
        for (state, amp) in &states {
            full.clear();
            full.extend(state.iter().cloned());
            full.resize(q, Rational::zero());
            for (a, wa) in atoms.iter().zip(&w) {
                law.multiply_slices(&full, a, &mut out);
                let top: f64 = (low..q).map(|c| xi[c] * rational_to_f64(&out[c])).sum();
                let entry = next.entry(out[..low].to_vec()).or_insert_with(Complex64::zero);
                *entry += amp * e(top) * wa;
            }
        }
        if next.len() > STATE_LIMIT {
            return Err(Error::ResourceExhausted {
                stored: next.len(),
                cap: STATE_LIMIT,
            });
        }
        states = next;
    }
    Ok(states
        .iter()
        .map(|(s, amp)| amp * e((0..low).map(|c| xi[c] * rational_to_f64(&s[c])).sum()))
        .sum())
}

/// Draws of the level-`n` alternating commutator sum of `n` block sums,
/// each a sum of `k` i.i.d. increments.
pub fn sample_commutator_measure(
    law: &Law<f64>,
    sampler: &Sampler,
    n: usize,
    k: usize,
    count: u64,
    key: StreamKey,
) -> Result<Vec<Vec<f64>>> {
    let alg = law.algebra();
    if n == 0 || n > alg.step() {
        return Err(Error::LevelOutOfRange { level: n, step: alg.step() });
    }
    let q = alg.dim();
    (0..count)
        .map(|s| {
            let mut rng = key.rng(s);
            let mut draw = vec![0.0; q];
            let omegas: Vec<LieVector<f64>> = (0..n)
                .map(|_| {
                    let mut w = vec![0.0; q];
                    for _ in 0..k {
                        sampler.sample_into(&mut rng, &mut draw);
                        w.iter_mut().zip(&draw).for_each(|(a, b)| *a += b);
                    }
                    LieVector::new(w)
                })
                .collect();
            full_alternating_sum(law, &omegas)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bch::build_group_law;
    use crate::catalog;
    use crate::montecarlo::testfn::TestFunctionKind;
    use crate::scalar::{ratio, rint};

    fn heis() -> (Law<f64>, Law<Rational>) {
        let t = build_group_law(&catalog::heisenberg3().algebra).unwrap();
        (t.compile(), t.compile())
    }

    fn two_atoms() -> MeasureSpec {
        MeasureSpec::uniform_atoms(vec![
            vec![rint(1), rint(0), rint(0)],
            vec![rint(0), rint(1), ratio(1, 2)],
        ])
        .unwrap()
    }

    #[test]
    fn point_mass_functional_is_exact() {
        let (law, _) = heis();
        let f = TestFunctionSpec::new(TestFunctionKind::ProductTent, 4.0);
        let mu = MeasureSpec::point_mass(vec![ratio(1, 2), rint(0), ratio(-1, 4)]);
        let setup = WalkSetup::new(law, &mu, f.clone()).unwrap().unscaled();
        let est = walk_functional(&setup, 1, StreamKey::new(1, "p", 0), 1000, 1);
        assert_eq!(est.mean, f.eval(&[0.5, 0.0, -0.25]));
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn exact_recursion_matches_enumeration() {
        let (law, exact) = heis();
        let mu = two_atoms();
        let (atoms, weights) = mu.atoms().unwrap();
        let af: Vec<Vec<f64>> = atoms.iter().map(|a| a.iter().map(rational_to_f64).collect()).collect();
        let wf: Vec<f64> = weights.iter().map(rational_to_f64).collect();
        for xi in [[0.0, 0.0, 1.0], [0.3, -0.2, 0.7], [0.1, 0.4, 0.0]] {
            for n in [1, 4, 9] {
                let a = exact_char_fn(&exact, &atoms, &weights, n, &xi).unwrap();
                let b = enumerate_char_fn(&law, &af, &wf, n, &xi).unwrap();
                assert!((a - b).norm() < 1e-12, "{xi:?} {n}: {a} {b}");
            }
        }
        let zero = exact_char_fn(&exact, &atoms, &weights, 6, &[0.0; 3]).unwrap();
        assert!((zero - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn level1_frequency_is_a_power() {
        let (law, exact) = heis();
        let mu = MeasureSpec::uniform_atoms(vec![
            vec![rint(1), rint(0), rint(0)],
            vec![rint(-1), rint(2), rint(0)],
            vec![rint(0), rint(-2), rint(3)],
        ])
        .unwrap();
        let (atoms, weights) = mu.atoms().unwrap();
        let xi = [0.13, 0.29];
        // chi uses e(+xi.x); the measure transform uses e(-xi.x)
        let single = mu.abelian_char_fn(law.algebra().basis(), &xi).unwrap().conj();
        for n in 1..=10 {
            let z = exact_char_fn(&exact, &atoms, &weights, n, &[xi[0], xi[1], 0.0]).unwrap();
            assert!((z - single.powi(n as i32)).norm() < 1e-12);
        }
    }

    #[test]
    fn estimate_agrees_with_enumeration() {
        let (law, exact) = heis();
        let mu = two_atoms();
        let (atoms, weights) = mu.atoms().unwrap();
        let xi = [0.0, 0.0, 1.0];
        let target = exact_char_fn(&exact, &atoms, &weights, 4, &xi).unwrap();
        let est = char_fn_estimate(&law, &mu.sampler().unwrap(), 4, &xi, StreamKey::new(9, "chi", 4), 50_000, 9);
        assert!((est.value() - target).norm() <= 3.0 * est.std_error(), "{:?} {target}", est.value());
        assert!(est.value().norm() <= 1.0 + 4.0 * est.std_error());
    }

    #[test]
    fn commutator_second_moment() {
        let (law, _) = heis();
        let basis = law.algebra().basis().clone();
        let mu = MeasureSpec::centered_box(&basis, ratio(1, 2));
        let draws = sample_commutator_measure(&law, &mu.sampler().unwrap(), 2, 1, 200_000, StreamKey::new(2, "comm", 0)).unwrap();
        let v: Vec<f64> = draws.iter().map(|d| d[0]).collect();
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let m2 = v.iter().map(|x| x * x).sum::<f64>() / n;
        let sd2 = (v.iter().map(|x| (x * x - m2).powi(2)).sum::<f64>() / n).sqrt() / n.sqrt();
        let sd1 = (m2 / n).sqrt();
        assert!(mean.abs() < 3.0 * sd1);
        // E[(a1 b2 - a2 b1)^2] = 2 (1/12)^2, by the product rule for
        // independent centered coordinates
        assert!((m2 - 1.0 / 72.0).abs() < 3.0 * sd2, "{m2}");
        // midpoint quadrature over the four coordinates
        let k = 24;
        let pts: Vec<f64> = (0..k).map(|i| -0.5 + (i as f64 + 0.5) / k as f64).collect();
        let mut quad = 0.0;
        for a1 in &pts {
            for b1 in &pts {
                for a2 in &pts {
                    for b2 in &pts {
                        quad += (a1 * b2 - a2 * b1).powi(2);
                    }
                }
            }
        }
        quad /= (k as f64).powi(4);
        assert!((quad - 1.0 / 72.0).abs() < 1e-4);
        let zero = sample_commutator_measure(&law, &MeasureSpec::point_mass(vec![rint(0); 3]).sampler().unwrap(), 2, 2, 10, StreamKey::new(2, "c", 0)).unwrap();
        assert!(zero.iter().all(|d| d.iter().all(|x| *x == 0.0)));
    }
}
