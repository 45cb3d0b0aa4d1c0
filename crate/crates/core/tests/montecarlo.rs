use std::f64::consts::PI;

use num_complex::Complex64;
use nilwalk::catalog;
use nilwalk::measures::MeasureSpec;
use nilwalk::montecarlo::walk::enumerate_char_fn;
use nilwalk::montecarlo::{
    char_fn_estimate, walk_functional, StreamKey, TestFunctionKind, TestFunctionSpec, WalkSetup,
};
use nilwalk::rearrange::{gcs_check, ActionSpec};
use nilwalk::scalar::{rational_to_f64, ratio, rint};
use nilwalk::{build_group_law, FloatLaw, FloatVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn heis_law() -> FloatLaw {
    build_group_law(&catalog::heisenberg3().algebra).unwrap().compile()
}

/// Heisenberg product written out by hand.
fn heis_mul(x: [f64; 3], y: [f64; 3]) -> [f64; 3] {
    [x[0] + y[0], x[1] + y[1], x[2] + y[2] + 0.5 * (x[0] * y[1] - x[1] * y[0])]
}

fn heis_product(xs: &[[f64; 3]]) -> [f64; 3] {
    xs.iter().fold([0.0; 3], |acc, x| heis_mul(acc, *x))
}

fn tent(x: &[f64], support: f64) -> f64 {
    x.iter().map(|v| (1.0 - 2.0 * v.abs() / support).max(0.0)).product()
}

fn three_atoms() -> (Vec<[f64; 3]>, MeasureSpec) {
    let spec = MeasureSpec::uniform_atoms(vec![
        vec![rint(1), rint(0), rint(0)],
        vec![ratio(-1, 2), rint(1), ratio(1, 3)],
        vec![ratio(-1, 2), rint(-1), rint(0)],
    ])
    .unwrap();
    let (atoms, _) = spec.atoms().unwrap();
    let f = atoms
        .iter()
        .map(|a| [rational_to_f64(&a[0]), rational_to_f64(&a[1]), rational_to_f64(&a[2])])
        .collect();
    (f, spec)
}

/// `E f(delta_{N^{-1/2}} Pi)` summed over all `3^N` strings.
fn enumerated_functional(atoms: &[[f64; 3]], n: usize, support: f64) -> f64 {
    let s = (n as f64).sqrt();
    let mut total = 0.0;
    for code in 0..atoms.len().pow(n as u32) {
        let mut c = code;
        let xs: Vec<[f64; 3]> = (0..n)
            .map(|_| {
                let a = atoms[c % atoms.len()];
                c /= atoms.len();
                a
            })
            .collect();
        let p = heis_product(&xs);
        total += tent(&[p[0] / s, p[1] / s, p[2] / (s * s)], support);
    }
    total / atoms.len().pow(n as u32) as f64
}

#[test]
fn walk_functional_matches_enumeration() {
    let (atoms, spec) = three_atoms();
    let f = TestFunctionSpec::new(TestFunctionKind::ProductTent, 2.0);
    let setup = WalkSetup::new(heis_law(), &spec, f).unwrap();
    for n in [1, 2, 5, 8, 10] {
        let exact = enumerated_functional(&atoms, n, 2.0);
        let est = walk_functional(&setup, n, StreamKey::new(3, "enum", n as u64), 40_000, 3);
        assert!((est.mean - exact).abs() <= 4.0 * est.std_error, "N={n}: {} vs {exact}", est.mean);
    }
}

#[test]
fn char_fn_matches_enumeration() {
    let (atoms, spec) = three_atoms();
    let law = heis_law();
    let sampler = spec.sampler().unwrap();
    let w = vec![1.0 / 3.0; 3];
    let af: Vec<Vec<f64>> = atoms.iter().map(|a| a.to_vec()).collect();
    for (n, xi) in [(3, [0.1, 0.2, 0.5]), (7, [0.0, 0.0, 0.3]), (10, [0.05, -0.1, 0.2])] {
        // enumeration by hand with the closed-form product
        let mut by_hand = Complex64::new(0.0, 0.0);
        for code in 0..3usize.pow(n) {
            let mut c = code;
            let xs: Vec<[f64; 3]> = (0..n)
                .map(|_| {
                    let a = atoms[c % 3];
                    c /= 3;
                    a
                })
                .collect();
            let p = heis_product(&xs);
            let t = xi[0] * p[0] + xi[1] * p[1] + xi[2] * p[2];
            by_hand += Complex64::from_polar(1.0, 2.0 * PI * t);
        }
        by_hand /= 3f64.powi(n as i32);
        let enumerated = enumerate_char_fn(&law, &af, &w, n as usize, &xi).unwrap();
        assert!((enumerated - by_hand).norm() < 1e-12);
        let est = char_fn_estimate(&law, &sampler, n as usize, &xi, StreamKey::new(4, "chi", n as u64), 40_000, 4);
        assert!((est.value() - by_hand).norm() <= 4.0 * est.std_error(), "N={n}");
        assert!(est.value().norm() <= 1.0 + 4.0 * est.std_error());
    }
}

#[test]
fn box_walk_matches_direct_simulation() {
    // independent sampler: uniform level-1 steps, product by hand
    let n = 64;
    let support = 2.0;
    let samples = 60_000;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut sum, mut sq) = (0.0, 0.0);
    let s = (n as f64).sqrt();
    for _ in 0..samples {
        let mut p = [0.0; 3];
        for _ in 0..n {
            let x = [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, 0.0];
            p = heis_mul(p, x);
        }
        let v = tent(&[p[0] / s, p[1] / s, p[2] / (s * s)], support);
        sum += v;
        sq += v * v;
    }
    let mean = sum / samples as f64;
    let se = ((sq / samples as f64 - mean * mean) / samples as f64).sqrt();

    let law = heis_law();
    let mu = MeasureSpec::centered_box(law.algebra().basis(), ratio(1, 2));
    let setup = WalkSetup::new(law, &mu, TestFunctionSpec::new(TestFunctionKind::ProductTent, support)).unwrap();
    let est = walk_functional(&setup, n, StreamKey::new(5, "box", 0), samples, 5);
    let combined = (se * se + est.std_error * est.std_error).sqrt();
    assert!((est.mean - mean).abs() <= 4.0 * combined, "{} vs {mean}", est.mean);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let law = heis_law();
    let mu = MeasureSpec::centered_box(law.algebra().basis(), ratio(1, 2));
    let setup = WalkSetup::new(law, &mu, TestFunctionSpec::new(TestFunctionKind::ProductTent, 2.0)).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| walk_functional(&setup, 16, StreamKey::new(8, "threads", 16), 20_000, 8))
    };
    let one = run(1);
    for t in [2, 3, 5] {
        let other = run(t);
        assert_eq!(one.mean.to_bits(), other.mean.to_bits());
        assert_eq!(one.std_error.to_bits(), other.std_error.to_bits());
    }
}

/// `E_x |E_tau e(xi P(tau x))|^2` for `n = 2`, `k = 1`, `N' = 2`, where tau
/// swaps the entries of either pair and `P` is the central coordinate.
fn gcs_lhs_by_hand(atoms: &[[f64; 3]], xi: f64) -> f64 {
    let mut total = 0.0;
    for code in 0..16 {
        let x: Vec<[f64; 3]> = (0..4).map(|i| atoms[(code >> i) & 1]).collect();
        let mut inner = Complex64::new(0.0, 0.0);
        for swap in 0..4 {
            let mut y = x.clone();
            if swap & 1 == 1 {
                y.swap(0, 1);
            }
            if swap & 2 == 2 {
                y.swap(2, 3);
            }
            inner += Complex64::from_polar(1.0, 2.0 * PI * xi * heis_product(&y)[2]);
        }
        total += (inner / 4.0).norm_sqr() / 16.0;
    }
    total
}

#[test]
fn gowers_cauchy_schwarz_factorization() {
    let atoms = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.5]];
    let law = heis_law();
    let lv: Vec<FloatVector> = atoms.iter().map(|a| FloatVector::new(a.to_vec())).collect();
    let spec = ActionSpec::tight(2, 1, 2).unwrap();
    for i in 0..20 {
        let xi = -1.3 + 0.137 * i as f64;
        let c = gcs_check(&law, &lv, &[0.5, 0.5], &spec, &[xi]).unwrap();
        // F = E e(-xi [w1, w2]) with [w1, w2] = a1 b2 - b1 a2
        let f: f64 = (0..4)
            .map(|j| {
                let (a, b) = (atoms[j & 1], atoms[j >> 1]);
                (2.0 * PI * xi * (a[0] * b[1] - a[1] * b[0])).cos() / 4.0
            })
            .sum();
        let rhs = (0.5 + 0.5 * f).powi(2);
        assert!((c.rhs - rhs).abs() < 1e-12, "xi={xi}");
        assert!((c.lhs[0] - rhs).abs() < 1e-12, "xi={xi}: {:?} vs {rhs}", c.lhs);
        assert!(c.lhs[1].abs() < 1e-12);
        assert!((gcs_lhs_by_hand(&atoms, xi) - rhs).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn char_fn_modulus_is_bounded(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -2.0f64..2.0, n in 1usize..20, seed in 0u64..1000) {
        let law = heis_law();
        let mu = MeasureSpec::centered_box(law.algebra().basis(), ratio(1, 2));
        let est = char_fn_estimate(&law, &mu.sampler().unwrap(), n, &[x, y, z], StreamKey::new(seed, "mod", 0), 2048, seed);
        prop_assert!(est.value().norm() <= 1.0 + 4.0 * est.std_error());
    }
}
