//! Experiment configuration and the per-walk-length driver.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::estimate::{ComplexEstimate, EstimateWithError};
use super::experiments::{
    decay_report, lindeberg_point, llt_point, moment_growth_point, moment_growth_report, truncation_point,
    truncation_report, LindebergSetup, MomentGrowthSpec, NoiseBudget, RunContext,
};
use super::sublevel::{sublevel_case, summarize, PolyMap, MIN_HITS};
use super::testfn::TestFunctionSpec;
use super::walk::{char_fn_acc, exact_char_fn, walk_functional_acc, WalkSetup};
use super::window::FrequencyWindow;
use super::CsvRow;
use crate::bch::{build_group_law, Law};
use crate::catalog::{lookup, GroupCatalogEntry};
use crate::error::{Error, Result};
use crate::measures::{matched_measure, MeasureSpec};
use crate::scalar::Rational;

pub const MIN_SAMPLES: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub group: String,
    #[serde(default)]
    pub measure: Option<MeasureSpec>,
    /// Comparison measure; defaults to the matched measure of `measure`.
    #[serde(default)]
    pub phi: Option<MeasureSpec>,
    /// Walk lengths, strictly increasing.
    #[serde(default)]
    pub schedule: Vec<usize>,
    /// Samples per walk length (the pilot size for auto-scaled gaps).
    pub samples: u64,
    pub seed: u64,
    #[serde(default)]
    pub test_function: Option<TestFunctionSpec>,
    #[serde(default)]
    pub frequencies: Vec<Vec<f64>>,
    #[serde(default)]
    pub g: Option<Vec<f64>>,
    #[serde(default)]
    pub h: Option<Vec<f64>>,
    #[serde(default)]
    pub output: Option<String>,
    pub experiment: ExperimentKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomPolynomials {
    pub count: usize,
    pub max_q: usize,
    pub max_degree: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentKind {
    WalkFunctional {
        #[serde(default = "yes")]
        scaled: bool,
    },
    CharFn,
    LindebergGap {
        eta: Vec<f64>,
        #[serde(default)]
        max_samples: Option<u64>,
        #[serde(default)]
        epsilons: Option<Vec<f64>>,
    },
    LltGap {
        #[serde(default)]
        max_samples: Option<u64>,
    },
    MomentGrowth(MomentGrowthSpec),
    TruncationTail {
        delta: f64,
    },
    Sublevel {
        #[serde(default)]
        polynomials: Vec<PolyMap>,
        #[serde(default)]
        random: Option<RandomPolynomials>,
        alphas: Vec<f64>,
        scales: Vec<f64>,
        points: u64,
    },
}

fn yes() -> bool {
    true
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn entry(&self) -> Result<GroupCatalogEntry> {
        lookup(&self.group).ok_or_else(|| bad(format!("unknown group {}", self.group)))
    }

    fn needs_measure(&self) -> bool {
        !matches!(self.experiment, ExperimentKind::Sublevel { .. })
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiment_id.is_empty() {
            return Err(bad("experiment_id is empty"));
        }
        if self.samples < MIN_SAMPLES {
            return Err(bad(format!("samples = {} is below {MIN_SAMPLES}", self.samples)));
        }
        let entry = self.entry()?;
        let basis = entry.algebra.basis();
        let q = basis.total_dim();
        if self.needs_measure() {
            if self.schedule.is_empty() || self.schedule[0] == 0 {
                return Err(bad("schedule must be nonempty with positive walk lengths"));
            }
            if self.schedule.windows(2).any(|w| w[0] >= w[1]) {
                return Err(bad("schedule must be strictly increasing"));
            }
            let mu = self.measure.as_ref().ok_or_else(|| bad("measure is required"))?;
            mu.validate()?;
            mu.check_dim(basis)?;
            if let Some(phi) = &self.phi {
                phi.validate()?;
                phi.check_dim(basis)?;
            }
        }
        for v in self.g.iter().chain(self.h.iter()).chain(self.frequencies.iter()) {
            if v.len() != q {
                return Err(Error::DimensionMismatch {
                    expected: q,
                    found: v.len(),
                });
            }
        }
        if let Some(f) = &self.test_function {
            f.validate()?;
        }
        match &self.experiment {
            ExperimentKind::WalkFunctional { .. } | ExperimentKind::LltGap { .. } => {
                if self.test_function.is_none() {
                    return Err(bad("test_function is required"));
                }
            }
            ExperimentKind::CharFn => {
                if self.frequencies.is_empty() {
                    return Err(bad("frequencies are required"));
                }
            }
            ExperimentKind::LindebergGap { eta, epsilons, .. } => {
                if eta.len() != q {
                    return Err(Error::DimensionMismatch {
                        expected: q,
                        found: eta.len(),
                    });
                }
                if let Some(e) = epsilons {
                    FrequencyWindow::new(e.clone())?;
                }
            }
            ExperimentKind::MomentGrowth(spec) => {
                if spec.stats.is_empty() || spec.m.is_empty() || spec.m.contains(&0) {
                    return Err(bad("moment growth needs statistics and positive m"));
                }
                for st in &spec.stats {
                    for (l, _) in st.blocks.iter().flatten() {
                        basis.position(*l)?;
                    }
                }
                if !(spec.tail_fraction > 0.0 && spec.tail_fraction < 1.0) {
                    return Err(bad("tail_fraction must lie in (0, 1)"));
                }
            }
            ExperimentKind::TruncationTail { delta } => {
                if !(*delta > 0.0) {
                    return Err(bad("delta must be positive"));
                }
            }
            ExperimentKind::Sublevel {
                polynomials,
                random,
                alphas,
                scales,
                points,
            } => {
                for p in polynomials {
                    p.validate()?;
                }
                if polynomials.is_empty() && random.is_none() {
                    return Err(bad("sublevel needs polynomials or a random family"));
                }
                if alphas.iter().chain(scales).any(|v| !(*v > 0.0)) || alphas.is_empty() || scales.is_empty() {
                    return Err(bad("alphas and scales must be positive"));
                }
                if *points < MIN_SAMPLES {
                    return Err(bad("too few quasi-Monte Carlo points"));
                }
            }
        }
        Ok(())
    }

    /// Canonical JSON text (keys sorted).
    pub fn canonical_json(&self) -> String {
        let v = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string(&sort_keys(v)).expect("json")
    }

    fn budget(&self, max_samples: Option<u64>) -> NoiseBudget {
        let d = NoiseBudget::default();
        NoiseBudget {
            pilot: self.samples,
            max_samples: max_samples.unwrap_or(d.max_samples).max(self.samples),
            noise_ratio: d.noise_ratio,
        }
    }

    /// Polynomials of a sublevel experiment, explicit ones first.
    pub fn sublevel_polynomials(&self) -> Vec<PolyMap> {
        match &self.experiment {
            ExperimentKind::Sublevel { polynomials, random, .. } => {
                let mut out = polynomials.clone();
                if let Some(r) = random {
                    for i in 0..r.count {
                        let q = 1 + i % r.max_q.max(1);
                        let s = 1 + (i / r.max_q.max(1)) as u32 % r.max_degree.max(1);
                        out.push(PolyMap::random(q, s, self.seed.wrapping_add(i as u64)));
                    }
                }
                out
            }
            _ => vec![],
        }
    }

    /// Units of work, one per walk length (or per polynomial).
    pub fn points(&self) -> Vec<usize> {
        match &self.experiment {
            ExperimentKind::Sublevel { .. } => (0..self.sublevel_polynomials().len()).collect(),
            _ => self.schedule.clone(),
        }
    }
}

fn sort_keys(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let sorted: std::collections::BTreeMap<String, Value> = m.into_iter().map(|(k, v)| (k, sort_keys(v))).collect();
            Value::Object(sorted.into_iter().collect())
        }
        Value::Array(a) => Value::Array(a.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOutput {
    pub rows: Vec<CsvRow>,
    pub report: Value,
}

struct Prepared {
    entry: GroupCatalogEntry,
    law: Law<f64>,
    exact: Law<Rational>,
    mu: Option<MeasureSpec>,
    phi: Option<MeasureSpec>,
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let entry = cfg.entry()?;
    let table = build_group_law(&entry.algebra)?;
    let needs_phi = matches!(cfg.experiment, ExperimentKind::LindebergGap { .. } | ExperimentKind::LltGap { .. });
    let phi = match (&cfg.phi, &cfg.measure, needs_phi) {
        (Some(p), _, _) => Some(p.clone()),
        (None, Some(mu), true) => Some(matched_measure(mu, &entry.algebra)?),
        _ => None,
    };
    Ok(Prepared {
        law: table.compile(),
        exact: table.compile(),
        mu: cfg.measure.clone(),
        phi,
        entry,
    })
}

fn walk_setups(cfg: &ExperimentConfig, p: &Prepared, scaled: bool) -> Result<Vec<WalkSetup>> {
    let f = cfg.test_function.clone().ok_or_else(|| bad("test_function is required"))?;
    [p.mu.as_ref(), p.phi.as_ref()]
        .into_iter()
        .flatten()
        .map(|m| {
            let s = WalkSetup::new(p.law.clone(), m, f.clone())?.translated(cfg.g.clone(), cfg.h.clone())?;
            Ok(if scaled { s } else { s.unscaled() })
        })
        .collect()
}

fn point_rows(cfg: &ExperimentConfig, p: &Prepared, ctx: &RunContext, n: usize) -> Result<Vec<CsvRow>> {
    let mu = || p.mu.as_ref().ok_or_else(|| bad("measure is required"));
    match &cfg.experiment {
        ExperimentKind::WalkFunctional { scaled } => {
            let s = &walk_setups(cfg, p, *scaled)?[0];
            let e = walk_functional_acc(s, n, ctx.key(n, 0), 0, cfg.samples).estimate(ctx.seed);
            Ok(vec![ctx.row(n, "functional", &e)])
        }
        ExperimentKind::CharFn => {
            let mu = mu()?;
            let sampler = mu.sampler()?;
            let mut rows = Vec::new();
            for (j, xi) in cfg.frequencies.iter().enumerate() {
                let a = char_fn_acc(&p.law, &sampler, n, xi, ctx.key(n, j as u64), 0, cfg.samples);
                rows.push(ctx.row(n, format!("chi_re[{j}]"), &a[0].estimate(ctx.seed)));
                rows.push(ctx.row(n, format!("chi_im[{j}]"), &a[1].estimate(ctx.seed)));
                if let Some((atoms, w)) = mu.atoms() {
                    if let Ok(z) = exact_char_fn(&p.exact, &atoms, &w, n, xi) {
                        let e = ComplexEstimate::exact(z, ctx.seed);
                        rows.push(ctx.row(n, format!("exact_chi_re[{j}]"), &e.re));
                        rows.push(ctx.row(n, format!("exact_chi_im[{j}]"), &e.im));
                    }
                }
            }
            Ok(rows)
        }
        ExperimentKind::LindebergGap { eta, max_samples, .. } => {
            let setup = LindebergSetup {
                law: &p.law,
                exact_law: &p.exact,
                mu: mu()?,
                phi: p.phi.as_ref().ok_or_else(|| bad("phi is missing"))?,
                eta,
                budget: cfg.budget(*max_samples),
            };
            lindeberg_point(ctx, &setup, n)
        }
        ExperimentKind::LltGap { max_samples } => {
            let s = walk_setups(cfg, p, true)?;
            llt_point(ctx, &s[0], &s[1], &cfg.budget(*max_samples), n)
        }
        ExperimentKind::MomentGrowth(spec) => moment_growth_point(ctx, &p.law, mu()?, spec, cfg.samples, n),
        ExperimentKind::TruncationTail { delta } => truncation_point(ctx, &p.law, mu()?, *delta, cfg.samples, n),
        ExperimentKind::Sublevel {
            alphas, scales, points, ..
        } => {
            let polys = cfg.sublevel_polynomials();
            let c = sublevel_case(n, &polys[n], alphas, scales, *points)?;
            let mut rows = Vec::new();
            for v in &c.values {
                let (m, r) = (&v.measure, &v.ratio);
                let tag = format!("alpha={:e};scale={:e}", v.alpha, v.scale);
                let se = (m * (1.0 - m) / *points as f64).sqrt();
                let e = |mean: f64, std_error: f64| EstimateWithError {
                    mean,
                    std_error,
                    samples: *points,
                    seed: ctx.seed,
                };
                rows.push(ctx.row(n, format!("measure[{tag}]"), &e(*m, se)));
                rows.push(ctx.row(n, format!("ratio[{tag}]"), &e(*r, if *m > 0.0 { r * se / m } else { 0.0 })));
            }
            Ok(rows)
        }
    }
}

fn report(cfg: &ExperimentConfig, p: &Prepared, rows: &[CsvRow]) -> Result<Value> {
    let basis = p.entry.algebra.basis();
    Ok(match &cfg.experiment {
        ExperimentKind::WalkFunctional { .. } | ExperimentKind::CharFn => json!({ "points": rows.len() }),
        ExperimentKind::LindebergGap { eta, epsilons, .. } => {
            let window = match epsilons {
                Some(e) => FrequencyWindow::new(e.clone())?,
                None => FrequencyWindow::default_for(basis.step()),
            };
            let gauges: Vec<(usize, f64)> = cfg
                .schedule
                .iter()
                .map(|&n| Ok((n, window.gauge(basis, &super::walk::scaled_frequency(basis, eta, n), n)?)))
                .collect::<Result<_>>()?;
            let d = decay_report(rows, -1.0, NoiseBudget::default().noise_ratio);
            let pass = d.fit.as_ref().is_some_and(|f| f.within(-1.0, 0.3)) && !d.inconclusive;
            json!({ "decay": d, "window": window, "window_gauge": gauges, "tolerance": 0.3, "pass": pass })
        }
        ExperimentKind::LltGap { .. } => {
            let d = decay_report(rows, -0.5, NoiseBudget::default().noise_ratio);
            let pass = d.fit.as_ref().is_some_and(|f| f.within(-0.5, 0.2) && f.ci_excludes_zero());
            json!({
                "decay": d,
                "tolerance": 0.2,
                "pass": pass,
                "scale_note": "gap of the dilated functional; the unscaled gap is this times N^(-D/2)",
                "homogeneous_dimension": basis.homogeneous_dim(),
            })
        }
        ExperimentKind::MomentGrowth(spec) => {
            let r = moment_growth_report(rows, spec, basis.step());
            let pass = r.fits.iter().all(|f| f.fit.as_ref().is_some_and(|s| s.within(f.target_slope, 0.25)));
            json!({ "moment_growth": r, "tolerance": 0.25, "pass": pass })
        }
        ExperimentKind::TruncationTail { delta } => {
            let r = truncation_report(rows, *delta);
            json!({ "truncation": r })
        }
        ExperimentKind::Sublevel { .. } => {
            let polys = cfg.sublevel_polynomials();
            let mut cases = Vec::new();
            for (i, pm) in polys.iter().enumerate() {
                let values: Vec<(f64, u64)> = rows
                    .iter()
                    .filter(|r| r.n == i && r.quantity.starts_with("ratio["))
                    .filter_map(|r| {
                        let m = rows.iter().find(|x| x.n == i && x.quantity == r.quantity.replacen("ratio", "measure", 1))?;
                        Some((r.mean, (m.mean * m.samples as f64).round() as u64))
                    })
                    .collect();
                let s = summarize(&values);
                cases.push(json!({
                    "index": i, "q": pm.q, "degree": pm.degree(), "height": pm.height(),
                    "summary": s,
                    "within_factor_3": s.spread <= 3.0,
                }));
            }
            let pass = cases.iter().all(|c| c["within_factor_3"] == json!(true));
            json!({ "cases": cases, "min_hits": MIN_HITS, "pass": pass })
        }
    })
}

/// Run every walk length not already present in `done`, calling `flush`
/// with the rows of each completed one, then build the report from all
/// rows.
pub fn run_experiment<F>(cfg: &ExperimentConfig, done: &[CsvRow], mut flush: F) -> Result<ExperimentOutput>
where
    F: FnMut(&[CsvRow]) -> Result<()>,
{
    cfg.validate()?;
    let p = prepare(cfg)?;
    let ctx = RunContext::new(&cfg.experiment_id, &cfg.group, cfg.seed);
    let mut rows = Vec::new();
    for n in cfg.points() {
        let prior: Vec<CsvRow> = done
            .iter()
            .filter(|r| r.n == n && r.experiment_id == cfg.experiment_id)
            .cloned()
            .collect();
        if !prior.is_empty() {
            rows.extend(prior);
            continue;
        }
        let new = point_rows(cfg, &p, &ctx, n)?;
        flush(&new)?;
        rows.extend(new);
    }
    let report = report(cfg, &p, &rows)?;
    Ok(ExperimentOutput { rows, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(extra: &str) -> String {
        format!(
            r#"{{
            "experiment_id": "tent", "group": "heisenberg3",
            "measure": {{"variant": "box_uniform", "intervals": [["-1/2","1/2"],["-1/2","1/2"],[0,0]]}},
            "schedule": [4, 8], "samples": 2000, "seed": 3,
            "test_function": {{"kind": "product-tent", "support": 4.0}},
            {extra}
        }}"#
        )
    }

    #[test]
    fn rejects_bad_configs() {
        let ok = config(r#""experiment": {"kind": "walk_functional"}"#);
        assert!(ExperimentConfig::from_json(&ok).is_ok());
        let few = ok.replace("2000", "999");
        assert!(matches!(ExperimentConfig::from_json(&few), Err(Error::InvalidConfig(_))));
        let order = ok.replace("[4, 8]", "[8, 4]");
        assert!(ExperimentConfig::from_json(&order).is_err());
        let unknown = ok.replace("\"seed\"", "\"sead\"");
        assert!(ExperimentConfig::from_json(&unknown).is_err());
    }

    #[test]
    fn resume_reuses_rows() {
        let cfg = ExperimentConfig::from_json(&config(r#""experiment": {"kind": "walk_functional"}"#)).unwrap();
        let mut flushed = 0;
        let full = run_experiment(&cfg, &[], |r| {
            flushed += r.len();
            Ok(())
        })
        .unwrap();
        assert_eq!(flushed, 2);
        let first = vec![full.rows[0].clone()];
        let mut again = 0;
        let resumed = run_experiment(&cfg, &first, |r| {
            again += r.len();
            Ok(())
        })
        .unwrap();
        assert_eq!(again, 1);
        assert_eq!(resumed.rows, full.rows);
        assert!(cfg.canonical_json().starts_with("{\"experiment\":"));
    }
}
