//! Decay experiments: Lindeberg gap, scaled-functional gap, moment growth
//! and truncation tails. Each walk length yields CSV rows; reports are
//! computed from rows so that resumed runs give the same report.

use serde::{Deserialize, Serialize};

use super::estimate::{Accumulator, ComplexEstimate, EstimateWithError};
use super::regression::{loglog_fit, SlopeFit};
use super::rng::{accumulate, StreamKey};
use super::walk::{char_fn_acc, exact_char_fn, scaled_frequency, walk_functional_acc, WalkSetup};
use super::CsvRow;
use crate::bch::Law;
use crate::error::{Error, Result};
use crate::measures::{MeasureSpec, Sampler};
use crate::scalar::{rational_to_f64, Rational};
use crate::ustat::{u_evaluate, UStatisticSpec};
use crate::LieVector;

/// Identifies an experiment's random streams and output rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RunContext {
    pub experiment_id: String,
    pub group: String,
    pub seed: u64,
}

impl RunContext {
    pub fn new(experiment_id: &str, group: &str, seed: u64) -> Self {
        RunContext {
            experiment_id: experiment_id.into(),
            group: group.into(),
            seed,
        }
    }

    pub fn key(&self, n: usize, leg: u64) -> StreamKey {
        StreamKey::new(self.seed, &self.experiment_id, ((n as u64) << 8) | leg)
    }

    pub fn row(&self, n: usize, quantity: impl Into<String>, e: &EstimateWithError) -> CsvRow {
        CsvRow {
            experiment_id: self.experiment_id.clone(),
            group: self.group.clone(),
            n,
            quantity: quantity.into(),
            mean: e.mean,
            std_error: e.std_error,
            samples: e.samples,
            seed: self.seed,
        }
    }
}

/// Sample-count policy for gap estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseBudget {
    /// Samples per Monte Carlo leg before rescaling.
    pub pilot: u64,
    /// Cap on Monte Carlo samples per walk length, all legs together.
    pub max_samples: u64,
    /// Target: standard error below `gap / noise_ratio`.
    pub noise_ratio: f64,
}

impl Default for NoiseBudget {
    fn default() -> Self {
        NoiseBudget {
            pilot: 20_000,
            max_samples: 4_000_000,
            noise_ratio: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub n: usize,
    pub gap: EstimateWithError,
    pub noise_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub points: Vec<GapPoint>,
    pub fit: Option<SlopeFit>,
    pub target_slope: f64,
    /// Some walk length missed the noise target within its sample cap.
    pub inconclusive: bool,
    /// Gap at the last walk length below the gap at the first.
    pub decreasing: bool,
}

/// Fit `log gap` against `log N` from rows with quantity `gap`.
pub fn decay_report(rows: &[CsvRow], target_slope: f64, noise_ratio: f64) -> DecayReport {
    let mut points: Vec<GapPoint> = rows
        .iter()
        .filter(|r| r.quantity == "gap")
        .map(|r| GapPoint {
            n: r.n,
            gap: EstimateWithError {
                mean: r.mean,
                std_error: r.std_error,
                samples: r.samples,
                seed: r.seed,
            },
            noise_ok: r.std_error == 0.0 || r.std_error * noise_ratio < r.mean,
        })
        .collect();
    points.sort_by_key(|p| p.n);
    let ns: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
    let v: Vec<f64> = points.iter().map(|p| p.gap.mean).collect();
    let se: Vec<f64> = points.iter().map(|p| p.gap.std_error).collect();
    let decreasing = points.len() >= 2 && v[v.len() - 1] < v[0];
    DecayReport {
        fit: loglog_fit(&ns, &v, &se),
        inconclusive: points.iter().any(|p| !p.noise_ok),
        decreasing,
        points,
        target_slope,
    }
}

/// Grow two accumulator sets until the standard error of `gap` is below
/// `gap / noise_ratio` or the cap is reached. `legs` lists which legs are
/// sampled; `extend(leg, current, extra)` returns the grown accumulators.
fn auto_scale<E, G>(budget: &NoiseBudget, legs: usize, mut accs: Vec<Vec<Accumulator>>, mut extend: E, gap: G) -> Vec<Vec<Accumulator>>
where
    E: FnMut(usize, &[Accumulator], u64) -> Vec<Accumulator>,
    G: Fn(&[Vec<Accumulator>]) -> EstimateWithError,
{
    if legs == 0 {
        return accs;
    }
    let per_leg_cap = budget.max_samples / legs as u64;
    for _ in 0..6 {
        let g = gap(&accs);
        if g.std_error == 0.0 || g.std_error * budget.noise_ratio < g.mean {
            break;
        }
        let current = accs[0].first().map_or(0, |a| a.count);
        if current >= per_leg_cap {
            break;
        }
        let factor = if g.mean > 0.0 {
            (1.2 * budget.noise_ratio * g.std_error / g.mean).powi(2)
        } else {
            f64::INFINITY
        };
        let target = ((current as f64 * factor.clamp(1.5, 1e6)).ceil() as u64).min(per_leg_cap);
        for (leg, acc) in accs.iter_mut().enumerate() {
            *acc = extend(leg, acc, target - current);
        }
    }
    accs
}

/// Exact or estimated `chi_N(xi)` for each measure, their distance, and the
/// rows for one walk length.
pub struct LindebergSetup<'a> {
    pub law: &'a Law<f64>,
    pub exact_law: &'a Law<Rational>,
    pub mu: &'a MeasureSpec,
    pub phi: &'a MeasureSpec,
    pub eta: &'a [f64],
    pub budget: NoiseBudget,
}

pub fn lindeberg_point(ctx: &RunContext, s: &LindebergSetup, n: usize) -> Result<Vec<CsvRow>> {
    let basis = s.law.algebra().basis();
    let xi = scaled_frequency(basis, s.eta, n);
    let exact_mu = match s.mu.atoms() {
        Some((atoms, w)) => match exact_char_fn(s.exact_law, &atoms, &w, n, &xi) {
            Ok(z) => Some(ComplexEstimate::exact(z, ctx.seed)),
            Err(Error::ResourceExhausted { .. }) => None,
            Err(e) => return Err(e),
        },
        None => None,
    };
    let samplers: Vec<Sampler> = match exact_mu {
        Some(_) => vec![s.phi.sampler()?],
        None => vec![s.phi.sampler()?, s.mu.sampler()?],
    };
    let keys = [ctx.key(n, 1), ctx.key(n, 0)];
    let accs: Vec<Vec<Accumulator>> = samplers
        .iter()
        .zip(keys)
        .map(|(sm, k)| char_fn_acc(s.law, sm, n, &xi, k, 0, s.budget.pilot))
        .collect();
    let to_est = |a: &[Accumulator]| ComplexEstimate {
        re: a[0].estimate(ctx.seed),
        im: a[1].estimate(ctx.seed),
    };
    let chis = |accs: &[Vec<Accumulator>]| {
        let phi = to_est(&accs[0]);
        let mu = exact_mu.unwrap_or_else(|| to_est(&accs[1]));
        (mu, phi)
    };
    let accs = auto_scale(
        &s.budget,
        samplers.len(),
        accs,
        |leg, cur, extra| {
            let more = char_fn_acc(s.law, &samplers[leg], n, &xi, keys[leg], cur[0].count, extra);
            cur.iter().zip(&more).map(|(a, b)| a.merge(b)).collect()
        },
        |a| {
            let (mu, phi) = chis(a);
            mu.abs_difference(&phi)
        },
    );
    let (mu, phi) = chis(&accs);
    let gap = mu.abs_difference(&phi);
    Ok(vec![
        ctx.row(n, "chi_mu_re", &mu.re),
        ctx.row(n, "chi_mu_im", &mu.im),
        ctx.row(n, "chi_phi_re", &phi.re),
        ctx.row(n, "chi_phi_im", &phi.im),
        ctx.row(n, "gap", &gap),
    ])
}

/// Scaled walk functionals for `mu` and `phi` at one walk length.
pub fn llt_point(ctx: &RunContext, mu: &WalkSetup, phi: &WalkSetup, budget: &NoiseBudget, n: usize) -> Result<Vec<CsvRow>> {
    let setups = [mu, phi];
    let keys = [ctx.key(n, 0), ctx.key(n, 1)];
    let accs: Vec<Vec<Accumulator>> = (0..2)
        .map(|i| vec![walk_functional_acc(setups[i], n, keys[i], 0, budget.pilot)])
        .collect();
    let gap = |a: &[Vec<Accumulator>]| a[0][0].estimate(ctx.seed).abs_difference(&a[1][0].estimate(ctx.seed));
    let accs = auto_scale(
        budget,
        2,
        accs,
        |leg, cur, extra| vec![cur[0].merge(&walk_functional_acc(setups[leg], n, keys[leg], cur[0].count, extra))],
        gap,
    );
    Ok(vec![
        ctx.row(n, "functional_mu", &accs[0][0].estimate(ctx.seed)),
        ctx.row(n, "functional_phi", &accs[1][0].estimate(ctx.seed)),
        ctx.row(n, "gap", &gap(&accs)),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentGrowthSpec {
    pub stats: Vec<UStatisticSpec>,
    /// Exponents `m` in `E|U|^{2m}`.
    pub m: Vec<u32>,
    /// `N'/N` for the tail split.
    #[serde(default = "default_tail_fraction")]
    pub tail_fraction: f64,
}

fn default_tail_fraction() -> f64 {
    0.25
}

pub fn moment_label(stat: usize, m: u32) -> String {
    format!("moment[stat={stat};m={m}]")
}

pub fn exact_label(stat: usize, m: u32) -> String {
    format!("exact_moment[stat={stat};m={m}]")
}

pub fn tail_label(level: usize, m: u32) -> String {
    format!("tail_ratio[level={level};m={m}]")
}

/// `E|sum_k x_k^{(c)}|^{2m}` for i.i.d. centered coordinates, `m <= 2`.
pub fn linear_sum_moment(mu: &MeasureSpec, c: usize, n: usize, m: u32) -> Option<Rational> {
    let q = mu.dim();
    let mom = |e: u32| {
        let mut exps = vec![0; q];
        exps[c] = e;
        mu.moment(&exps)
    };
    let nn = Rational::from_integer(n.into());
    match m {
        1 => Some(&nn * mom(2)),
        2 => {
            let m2 = mom(2);
            Some(&nn * mom(4) + Rational::from_integer(3.into()) * &nn * (&nn - Rational::from_integer(1.into())) * &m2 * &m2)
        }
        _ => None,
    }
}

/// Level-1 coordinate of a statistic that is a plain sum of one level-1
/// coordinate.
fn linear_level1(stat: &UStatisticSpec, law: &Law<f64>) -> Option<usize> {
    match stat.blocks.as_slice() {
        [b] if b.len() == 1 && b[0].1 == 1 && b[0].0.level == 1 => law.algebra().basis().position(b[0].0).ok(),
        _ => None,
    }
}

pub fn moment_growth_point(
    ctx: &RunContext,
    law: &Law<f64>,
    mu: &MeasureSpec,
    spec: &MomentGrowthSpec,
    samples: u64,
    n: usize,
) -> Result<Vec<CsvRow>> {
    let basis = law.algebra().basis();
    let q = basis.total_dim();
    let step = basis.step();
    let sampler = mu.sampler()?;
    let n0 = ((spec.tail_fraction * n as f64).round() as usize).clamp(1, n.saturating_sub(1).max(1));
    let width = spec.stats.len() * spec.m.len() + step * spec.m.len();
    let accs = accumulate(
        ctx.key(n, 0),
        0,
        samples,
        width,
        || (vec![LieVector::<f64>::zero(q); n], vec![0.0; q], vec![0.0; q], vec![0.0; q]),
        |rng, (xs, head, tail, scratch), out| {
            head.iter_mut().for_each(|v| *v = 0.0);
            tail.iter_mut().for_each(|v| *v = 0.0);
            for (k, x) in xs.iter_mut().enumerate() {
                sampler.sample_into(rng, &mut x.coords);
                if k < n0 {
                    law.right_multiply_in_place(head, &x.coords, scratch);
                } else {
                    law.right_multiply_in_place(tail, &x.coords, scratch);
                }
            }
            let mut i = 0;
            for st in &spec.stats {
                let u = u_evaluate(st, xs, basis).abs();
                for &m in &spec.m {
                    out[i] = u.powi(2 * m as i32);
                    i += 1;
                }
            }
            // Pi = head * tail
            let mut full = head.clone();
            law.right_multiply_in_place(&mut full, tail, scratch);
            for lvl in 1..=step {
                let r = basis.level_range(lvl);
                let d2: f64 = r.clone().map(|c| (full[c] - tail[c]).powi(2)).sum();
                for &m in &spec.m {
                    out[i] = d2.powi(m as i32);
                    i += 1;
                }
            }
        },
    );
    let mut rows = Vec::new();
    let mut i = 0;
    for (si, st) in spec.stats.iter().enumerate() {
        let exact_coord = linear_level1(st, law);
        for &m in &spec.m {
            rows.push(ctx.row(n, moment_label(si, m), &accs[i].estimate(ctx.seed)));
            if let Some(v) = exact_coord.and_then(|c| linear_sum_moment(mu, c, n, m)) {
                rows.push(ctx.row(n, exact_label(si, m), &EstimateWithError::exact(rational_to_f64(&v), ctx.seed)));
            }
            i += 1;
        }
    }
    let frac = n0 as f64 / n as f64;
    for lvl in 1..=step {
        for &m in &spec.m {
            let norm = (n as f64).powi((m as usize * lvl) as i32) * frac.powi(m as i32);
            let e = accs[i].estimate(ctx.seed);
            rows.push(ctx.row(
                n,
                tail_label(lvl, m),
                &EstimateWithError {
                    mean: e.mean / norm,
                    std_error: e.std_error / norm,
                    ..e
                },
            ));
            i += 1;
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentFit {
    pub stat: usize,
    pub m: u32,
    pub hom_degree: usize,
    pub target_slope: f64,
    pub fit: Option<SlopeFit>,
    /// Largest `|estimate - exact| / se` where a closed form exists.
    pub exact_z: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentGrowthReport {
    pub fits: Vec<MomentFit>,
    /// `(level, m, max / min)` of the tail ratio across walk lengths.
    pub tail_spread: Vec<(usize, u32, f64)>,
}

pub fn moment_growth_report(rows: &[CsvRow], spec: &MomentGrowthSpec, step: usize) -> MomentGrowthReport {
    let series = |label: &str| {
        let mut v: Vec<&CsvRow> = rows.iter().filter(|r| r.quantity == label).collect();
        v.sort_by_key(|r| r.n);
        v
    };
    let mut fits = Vec::new();
    for (si, st) in spec.stats.iter().enumerate() {
        for &m in &spec.m {
            let pts = series(&moment_label(si, m));
            let ns: Vec<f64> = pts.iter().map(|r| r.n as f64).collect();
            let v: Vec<f64> = pts.iter().map(|r| r.mean).collect();
            let se: Vec<f64> = pts.iter().map(|r| r.std_error).collect();
            let exact = series(&exact_label(si, m));
            let exact_z = (!exact.is_empty()).then(|| {
                exact
                    .iter()
                    .filter_map(|x| pts.iter().find(|p| p.n == x.n).map(|p| (p.mean - x.mean).abs() / p.std_error))
                    .fold(0.0, f64::max)
            });
            fits.push(MomentFit {
                stat: si,
                m,
                hom_degree: st.hom_degree(),
                target_slope: (m as usize * st.hom_degree()) as f64,
                fit: loglog_fit(&ns, &v, &se),
                exact_z,
            });
        }
    }
    let mut tail_spread = Vec::new();
    for lvl in 1..=step {
        for &m in &spec.m {
            let v: Vec<f64> = series(&tail_label(lvl, m)).iter().map(|r| r.mean).collect();
            let hi = v.iter().cloned().fold(0.0, f64::max);
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            tail_spread.push((lvl, m, if lo > 0.0 { hi / lo } else { f64::INFINITY }));
        }
    }
    MomentGrowthReport { fits, tail_spread }
}

/// Fraction of walks with `max_n N^{-n/2} ||Pi^{(n)}|| > N^delta`.
pub fn truncation_point(
    ctx: &RunContext,
    law: &Law<f64>,
    mu: &MeasureSpec,
    delta: f64,
    samples: u64,
    n: usize,
) -> Result<Vec<CsvRow>> {
    let basis = law.algebra().basis();
    let q = basis.total_dim();
    let sampler = mu.sampler()?;
    let threshold = (n as f64).powf(delta);
    let acc = accumulate(
        ctx.key(n, 0),
        0,
        samples,
        2,
        || super::walk::WalkBuffers::new(q),
        |rng, b, out| {
            super::walk::walk(law, &sampler, n, rng, b);
            let gauge = (1..=basis.step())
                .map(|lvl| {
                    let norm = basis.level_range(lvl).map(|c| b.acc[c] * b.acc[c]).sum::<f64>().sqrt();
                    norm * (n as f64).powf(-(lvl as f64) / 2.0)
                })
                .fold(0.0, f64::max);
            out[0] = if gauge > threshold { 1.0 } else { 0.0 };
            out[1] = gauge;
        },
    );
    Ok(vec![
        ctx.row(n, "exceedance", &acc[0].estimate(ctx.seed)),
        ctx.row(n, "scaled_gauge", &acc[1].estimate(ctx.seed)),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub delta: f64,
    pub exceedance: Vec<(usize, f64)>,
    pub non_increasing: bool,
    pub final_value: f64,
}

pub fn truncation_report(rows: &[CsvRow], delta: f64) -> TruncationReport {
    let mut ex: Vec<(usize, f64)> = rows
        .iter()
        .filter(|r| r.quantity == "exceedance")
        .map(|r| (r.n, r.mean))
        .collect();
    ex.sort_by_key(|p| p.0);
    TruncationReport {
        delta,
        non_increasing: ex.windows(2).all(|w| w[1].1 <= w[0].1),
        final_value: ex.last().map_or(0.0, |p| p.1),
        exceedance: ex,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bch::build_group_law;
    use crate::catalog;
    use crate::measures::matched_measure;
    use crate::scalar::{ratio, rint};
    use crate::Label;

    fn ctx() -> RunContext {
        RunContext::new("t", "heisenberg3", 11)
    }

    #[test]
    fn zero_frequency_gap_is_zero() {
        let alg = catalog::heisenberg3().algebra;
        let t = build_group_law(&alg).unwrap();
        let (law, exact): (Law<f64>, Law<Rational>) = (t.compile(), t.compile());
        let mu = MeasureSpec::rademacher(3, 0);
        let phi = matched_measure(&mu, &alg).unwrap();
        let s = LindebergSetup {
            law: &law,
            exact_law: &exact,
            mu: &mu,
            phi: &phi,
            eta: &[0.0; 3],
            budget: NoiseBudget {
                pilot: 1000,
                ..Default::default()
            },
        };
        let rows = lindeberg_point(&ctx(), &s, 8).unwrap();
        let gap = rows.iter().find(|r| r.quantity == "gap").unwrap();
        assert_eq!((gap.mean, gap.std_error), (0.0, 0.0));
        assert_eq!(gap.samples, 1000);
    }

    #[test]
    fn linear_moments_closed_form() {
        let alg = catalog::heisenberg3().algebra;
        let law: Law<f64> = build_group_law(&alg).unwrap().compile();
        let mu = MeasureSpec::centered_box(alg.basis(), ratio(1, 2));
        let spec = MomentGrowthSpec {
            stats: vec![UStatisticSpec::linear(Label::new(1, 1))],
            m: vec![1, 2],
            tail_fraction: 0.25,
        };
        // E|sum|^2 = N/12, E|sum|^4 = N/80 + 3N(N-1)/144
        assert_eq!(linear_sum_moment(&mu, 0, 8, 1), Some(ratio(8, 12)));
        assert_eq!(linear_sum_moment(&mu, 0, 8, 2), Some(ratio(8, 80) + ratio(3 * 8 * 7, 144)));
        let rows = moment_growth_point(&ctx(), &law, &mu, &spec, 40_000, 8).unwrap();
        let rep = moment_growth_report(&rows, &spec, 2);
        for f in &rep.fits {
            assert!(f.exact_z.unwrap() < 4.0, "{f:?}");
        }
        let zero = MeasureSpec::point_mass(vec![rint(0); 3]);
        let rows = moment_growth_point(&ctx(), &law, &zero, &spec, 2000, 8).unwrap();
        assert!(rows.iter().all(|r| r.mean == 0.0));
    }

    #[test]
    fn huge_delta_never_exceeds() {
        let alg = catalog::heisenberg3().algebra;
        let law: Law<f64> = build_group_law(&alg).unwrap().compile();
        let mu = MeasureSpec::centered_box(alg.basis(), ratio(1, 2));
        let rows = truncation_point(&ctx(), &law, &mu, 10.0, 20_000, 16).unwrap();
        assert_eq!(rows[0].mean, 0.0);
    }

    #[test]
    fn report_from_rows() {
        let c = ctx();
        let rows: Vec<CsvRow> = [8usize, 16, 32, 64]
            .iter()
            .map(|&n| {
                c.row(
                    n,
                    "gap",
                    &EstimateWithError {
                        mean: 1.0 / n as f64,
                        std_error: 0.01 / n as f64,
                        samples: 10,
                        seed: 11,
                    },
                )
            })
            .collect();
        let r = decay_report(&rows, -1.0, 5.0);
        assert!(!r.inconclusive && r.decreasing);
        assert!(r.fit.unwrap().within(-1.0, 1e-9));
    }
}
