//! Subcommands other than `run`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use nilwalk::algebra::ValidationReport;
use nilwalk::catalog::{AlgebraDoc, OracleKind, CATALOG_NAMES};
use nilwalk::measures::{cramer_check, MeasureSpec};
use nilwalk::oracle::oracle_agreement;
use nilwalk::product::{check_product_lemma, ProductExpander};
use nilwalk::rearrange::{commutator_convention_report, mark_degenerate, verify_action_identities, ActionSpec};
use nilwalk::report::{CheckStatus, LemmaReport};
use nilwalk::{build_group_law, lookup, validate_algebra, Algebra, Error, GroupCatalogEntry};

use crate::failure::Failure;

pub fn print_json(v: &impl serde::Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v)?;
    match writeln!(std::io::stdout(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

/// A catalog entry, or the axiom report of an algebra file that fails
/// validation.
pub fn load_group(group: &str) -> Result<Result<GroupCatalogEntry, ValidationReport>, Failure> {
    if let Some(e) = lookup(group) {
        return Ok(Ok(e));
    }
    let path = Path::new(group);
    if !path.exists() {
        return Err(Failure::usage(format!(
            "{group} is neither a catalog group ({}) nor a readable file",
            CATALOG_NAMES.join(", ")
        )));
    }
    let text = fs::read_to_string(path)?;
    let doc = AlgebraDoc::from_json(&text)?;
    let (basis, constants) = doc.to_parts()?;
    let report = validate_algebra(&basis, &constants)?;
    if !report.is_valid() {
        return Ok(Err(report));
    }
    Ok(Ok(GroupCatalogEntry {
        name: group.to_string(),
        algebra: Algebra::new(basis, constants)?,
        matrix_dim: None,
        oracle: Some(OracleKind::TruncatedTensor),
    }))
}

fn require_valid(group: &str) -> Result<GroupCatalogEntry, Failure> {
    load_group(group)?.map_err(|r| {
        Failure::violation(format!(
            "{group} fails the algebra axioms: {}",
            r.violations.first().map(|v| v.to_string()).unwrap_or_default()
        ))
    })
}

fn describe(e: &GroupCatalogEntry) -> Value {
    let b = e.algebra.basis();
    json!({
        "name": e.name,
        "step": b.step(),
        "dims": b.dims(),
        "dimension": b.total_dim(),
        "homogeneous_dimension": b.homogeneous_dim(),
        "oracle": e.oracle,
    })
}

pub fn list_groups() -> Result<(), Failure> {
    let groups: Vec<Value> = CATALOG_NAMES.iter().filter_map(|n| lookup(n)).map(|e| describe(&e)).collect();
    print_json(&groups)
}

pub fn validate(group: &str, samples: usize, seed: u64) -> Result<(), Failure> {
    let entry = match load_group(group)? {
        Ok(e) => e,
        Err(report) => {
            print_json(&json!({
                "group": group,
                "algebra_valid": false,
                "violations": report.violations,
                "witness": report.violations.first().map(|v| v.to_string()),
            }))?;
            return Err(Failure::violation(format!("{group} fails the algebra axioms")));
        }
    };
    let table = build_group_law(&entry.algebra)?;
    let law_check = table.check_invariants();
    let oracle = match oracle_agreement(&entry, &table, samples, seed) {
        Ok(a) => Some(a),
        Err(Error::NoOracle(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let oracle_ok = oracle.as_ref().is_none_or(|a| a.passed());
    print_json(&json!({
        "group": describe(&entry),
        "algebra_valid": true,
        "violations": [],
        "group_law_invariants": law_check.as_ref().err().map(|e| e.to_string()).unwrap_or_else(|| "pass".into()),
        "oracle_agreement": oracle,
        "seed": seed,
    }))?;
    if let Err(e) = law_check {
        return Err(Failure::violation(e.to_string()));
    }
    if !oracle_ok {
        return Err(Failure::violation("group law disagrees with the matrix oracle"));
    }
    Ok(())
}

pub fn emit_law(group: &str, output: Option<&Path>) -> Result<(), Failure> {
    let entry = require_valid(group)?;
    let table = build_group_law(&entry.algebra)?;
    let doc = json!({ "group": describe(&entry), "law": table.to_doc() });
    match output {
        Some(p) => fs::write(p, serde_json::to_string_pretty(&doc)? + "\n")?,
        None => print_json(&doc)?,
    }
    Ok(())
}

/// Product-polynomial checks for `2 <= N < M <= max_n`.
fn product_suite(entry: &GroupCatalogEntry, max_n: usize, cap: usize) -> Result<Vec<LemmaReport>, Failure> {
    let table = build_group_law(&entry.algebra)?;
    let mut expander = ProductExpander::new(&table, cap);
    let mut expansions = Vec::new();
    for n in 2..=max_n {
        expansions.push(expander.expansion(n)?.clone());
    }
    let mut out = Vec::new();
    for (i, small) in expansions.iter().enumerate() {
        for large in &expansions[i + 1..] {
            out.extend(check_product_lemma(&entry.algebra, small, large));
        }
    }
    Ok(out)
}

fn action_suite(
    entry: &GroupCatalogEntry,
    max_level: usize,
    blocks: &[usize],
    segments: &[usize],
    cap: usize,
) -> Result<Vec<LemmaReport>, Failure> {
    let alg = &entry.algebra;
    let table = build_group_law(alg)?;
    let mut out = Vec::new();
    if alg.step() < 2 {
        out.push(LemmaReport {
            check: "single_block_nonvanishing".into(),
            parameters: json!({ "step": alg.step() }),
            status: CheckStatus::NotApplicable,
            witness: None,
        });
        return Ok(out);
    }
    for n in 2..=max_level.min(alg.step()) {
        for &k in blocks {
            for &np in segments {
                let spec = ActionSpec::tight(n, k, np)?;
                let mut reports = verify_action_identities(&table, &spec, cap)?;
                mark_degenerate(alg, n, &mut reports);
                out.extend(reports);
            }
        }
        if alg.level_generated(n) {
            out.push(commutator_convention_report(&table, n)?);
        }
    }
    Ok(out)
}

pub fn verify_lemmas(
    group: &str,
    max_n: usize,
    max_level: Option<usize>,
    blocks: &[usize],
    segments: &[usize],
    cap: usize,
) -> Result<(), Failure> {
    if max_n < 3 {
        return Err(Failure::usage("--max-n must be at least 3"));
    }
    let entry = require_valid(group)?;
    let mut reports = product_suite(&entry, max_n, cap)?;
    let level = max_level.unwrap_or(entry.algebra.step());
    reports.extend(action_suite(&entry, level, blocks, segments, cap)?);
    let failed = reports.iter().find(|r| r.status == CheckStatus::Fail).cloned();
    print_json(&json!({
        "group": describe(&entry),
        "max_n": max_n,
        "max_level": level,
        "passed": failed.is_none(),
        "reports": reports,
    }))?;
    match failed {
        None => Ok(()),
        Some(r) => Err(Failure::violation(format!(
            "{} fails at {}: {}",
            r.check,
            r.parameters,
            r.witness.unwrap_or_default()
        ))),
    }
}

pub fn cramer(measure: &Path, group: &str, r_min: f64, r_max: f64, density: f64) -> Result<(), Failure> {
    let entry = require_valid(group)?;
    let mu: MeasureSpec = serde_json::from_str(&fs::read_to_string(measure)?)?;
    let report = cramer_check(&mu, entry.algebra.basis(), r_min, r_max, density)?;
    print_json(&report)
}
