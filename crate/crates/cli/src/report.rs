//! Verification runs and demonstrations, rendered as JSON or CSV.

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use padic_limits::completion_characters::{character, complete};
use padic_limits::diff_profinite::{group_order, weak_distance, PermTower};
use padic_limits::grothendieck::rank_report;
use padic_limits::loop_monoid::LevelCodomain;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::checks::{self, CheckResult, Verdict, Violation};
use crate::scenario::{Fault, Scenario, Setup};

pub const TOOL: &str = "padic-limits";

/// Independent stream for one named check: the first 32 bytes of
/// `SHA-256(seed_le || name)`.
pub fn substream(seed: u64, name: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(name.as_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cases: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<Violation>,
}

impl CheckRecord {
    fn new(name: &str, verdict: Verdict) -> Self {
        let mut r = CheckRecord {
            name: name.into(),
            status: "pass",
            cases: None,
            details: None,
            reason: None,
            violation: None,
        };
        match verdict {
            Verdict::Pass { cases, details } => {
                r.cases = Some(cases);
                r.details = (!details.is_null()).then_some(details);
            }
            Verdict::Skipped(reason) => {
                r.status = "skipped";
                r.reason = Some(reason);
            }
            Verdict::Fail(v) => {
                r.status = "fail";
                r.violation = Some(v);
            }
        }
        r
    }

    pub fn failed(&self) -> bool {
        self.status == "fail"
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub scenario_hash: String,
    pub scenario: Scenario,
    #[serde(flatten)]
    pub body: Map<String, Value>,
}

impl Report {
    fn new(setup: &Setup, command: &str, body: Value) -> Self {
        let Value::Object(body) = body else {
            panic!("report bodies are objects")
        };
        Report {
            tool: TOOL,
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            scenario_hash: setup.scenario.hash(),
            scenario: setup.scenario.clone(),
            body,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

type CheckFn = fn(&Setup, &mut ChaCha8Rng) -> CheckResult;

fn codomains(setup: &Setup) -> Result<Vec<LevelCodomain>, Violation> {
    Ok(checks::codomain_levels(
        &setup.codomain,
        setup.scenario.depth,
    )?)
}

/// Runs `check` at every codomain level and collects the per-level details.
fn per_level(
    setup: &Setup,
    rng: &mut ChaCha8Rng,
    check: impl Fn(&LevelCodomain, &mut ChaCha8Rng) -> CheckResult,
) -> CheckResult {
    let mut cases = 0;
    let mut levels = Vec::new();
    for cod in codomains(setup)? {
        match check(&cod, rng)? {
            Verdict::Pass { cases: c, details } => {
                cases += c;
                levels.push(details);
            }
            Verdict::Skipped(reason) => {
                levels.push(json!({ "level": cod.level(), "skipped": reason }))
            }
            fail @ Verdict::Fail(_) => return Ok(fail),
        }
    }
    Ok(Verdict::Pass {
        cases,
        details: json!({ "levels": levels }),
    })
}

/// The verification suite, in report order.
pub fn check_list() -> Vec<(&'static str, CheckFn)> {
    vec![
        ("level_rings.homomorphism", |s, r| {
            checks::level_homomorphism(s.prime, s.scenario.depth, s.scenario.bounds.cases, r)
        }),
        ("manifold_tower.cardinality", |s, _| {
            checks::cardinality(&s.manifold, s.scenario.depth)
        }),
        ("function_tower.composition", |s, r| {
            checks::tower_composition(
                &s.manifold,
                &s.codomain,
                s.scenario.depth,
                s.scenario.bounds.cases,
                r,
            )
        }),
        ("function_tower.polynomial_projection", |s, r| {
            checks::polynomial_projection(s.prime, s.scenario.depth, s.scenario.bounds.cases, r)
        }),
        ("function_tower.mahler_roundtrip", |s, r| {
            checks::mahler_roundtrip(
                s.prime,
                8,
                s.scenario.depth.min(6),
                s.scenario.bounds.cases,
                r,
            )
        }),
        ("diff_profinite.tower_laws", |s, r| {
            let fault = s.scenario.inject_fault == Some(Fault::PermTower);
            checks::perm_tower_laws(
                &s.manifold,
                s.scenario.depth,
                s.scenario.bounds.cases,
                fault,
                r,
            )
        }),
        ("diff_profinite.hom_enumeration", |s, r| {
            let b = &s.scenario.bounds;
            checks::hom_enumeration(&s.manifold, s.scenario.depth, b.hom_points, b.cases, r)
        }),
        ("diff_profinite.divisibility", |s, _| {
            checks::divisibility(&s.manifold, s.scenario.depth, 5000)
        }),
        ("diff_profinite.weak_metric", |s, r| {
            checks::weak_metric(&s.manifold, s.scenario.depth, s.scenario.bounds.cases, r)
        }),
        ("loop_monoid.laws", |s, r| {
            let b = s.scenario.bounds.clone();
            per_level(s, r, |cod, r| {
                checks::loop_laws(cod, b.support, b.classes, 100_000, b.cases, r)
            })
        }),
        ("loop_monoid.connecting", |s, r| {
            let b = &s.scenario.bounds;
            checks::connecting_maps(&codomains(s)?, b.support, b.classes, b.cases, r)
        }),
        ("loop_monoid.canonicalization", |s, _| {
            let cod = LevelCodomain::from_manifold(&s.codomain, 1)?;
            // keep the number of maps per domain small
            let domain = (1..=s.scenario.bounds.orbit_domain)
                .take_while(|&n| (cod.size() as u128).pow(n as u32 - 1) <= 256)
                .last()
                .unwrap_or(1);
            checks::canonicalization(&cod, domain)
        }),
        ("grothendieck.structure", |s, r| {
            let b = s.scenario.bounds.clone();
            per_level(s, r, |cod, r| {
                checks::grothendieck_structure(cod, b.support, b.classes, b.cases.min(50), r)
            })
        }),
        ("completion_characters.characters", |s, r| {
            let c = &s.scenario.complete;
            checks::completion_characters(s.prime, c.precision, c.terms, s.scenario.bounds.cases, r)
        }),
    ]
}

fn run_one(setup: &Setup, name: &str, check: CheckFn) -> (CheckRecord, Duration) {
    let start = Instant::now();
    let mut rng = substream(setup.scenario.seed, name);
    let verdict = check(setup, &mut rng).unwrap_or_else(Verdict::Fail);
    (CheckRecord::new(name, verdict), start.elapsed())
}

/// Runs every check, in parallel. Timings are returned separately so the
/// report stays byte-identical across runs.
pub fn run_verify(setup: &Setup) -> (Report, Vec<(String, Duration)>) {
    let results: Vec<(CheckRecord, Duration)> = check_list()
        .into_par_iter()
        .map(|(name, check)| run_one(setup, name, check))
        .collect();
    let timings = results.iter().map(|(r, d)| (r.name.clone(), *d)).collect();
    let records: Vec<CheckRecord> = results.into_iter().map(|(r, _)| r).collect();
    let passed = records.iter().all(|r| !r.failed());
    let body = json!({ "passed": passed, "checks": records });
    (Report::new(setup, "verify", body), timings)
}

/// Serial variant of [`run_verify`], used to confirm that parallelism does
/// not change the report.
pub fn run_verify_serial(setup: &Setup) -> Report {
    let records: Vec<CheckRecord> = check_list()
        .into_iter()
        .map(|(name, check)| run_one(setup, name, check).0)
        .collect();
    let passed = records.iter().all(|r| !r.failed());
    Report::new(
        setup,
        "verify",
        json!({ "passed": passed, "checks": records }),
    )
}

pub fn report_passed(report: &Report) -> bool {
    report
        .body
        .get("passed")
        .and_then(Value::as_bool)
        .unwrap_or(true)
}

fn big(n: &BigUint) -> Value {
    match n.to_u64() {
        Some(v) => json!(v),
        None => json!(n.to_string()),
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct DemoError(String);

impl From<padic_limits::Error> for DemoError {
    fn from(e: padic_limits::Error) -> Self {
        DemoError(e.to_string())
    }
}

/// Orders of `Hom(M_k)`, the divisibility comparison, and sample weak
/// distances between random towers.
pub fn diff_tower(setup: &Setup) -> Result<Report, DemoError> {
    let s = &setup.scenario;
    let levels = (1..=s.depth)
        .map(|k| group_order(&setup.manifold, k))
        .collect::<Result<Vec<_>, _>>()?;
    let orders: Vec<Value> = levels.iter().map(|l| big(&l.order)).collect();
    let mut rng = substream(s.seed, "demo.diff-tower");
    let id = PermTower::identity(&setup.manifold, s.depth)?;
    let samples = (0..3)
        .map(|_| {
            let a = PermTower::random(&setup.manifold, s.depth, &mut rng)?;
            let b = PermTower::random(&setup.manifold, s.depth, &mut rng)?;
            Ok(json!({
                "top_level": a.levels().last(),
                "distance_to_identity": weak_distance(&a, &id)?,
                "distance_to_other": weak_distance(&a, &b)?,
            }))
        })
        .collect::<Result<Vec<_>, padic_limits::Error>>()?;
    Ok(Report::new(
        setup,
        "diff-tower",
        json!({ "orders": orders, "levels": levels, "samples": samples }),
    ))
}

/// Classes of bounded support at one level with their wedge table; entries
/// whose wedge exceeds the support bound are null.
pub fn loop_table(setup: &Setup) -> Result<Report, DemoError> {
    let spec = &setup.scenario.loop_table;
    let cod = LevelCodomain::from_manifold(&setup.codomain, spec.level)?;
    let classes = checks::bounded_classes(&cod, spec.support, 10_000).ok_or_else(|| {
        DemoError(format!(
            "more than 10000 classes of support <= {}",
            spec.support
        ))
    })?;
    let table: Vec<Vec<Option<usize>>> = classes
        .iter()
        .map(|a| {
            classes
                .iter()
                .map(|b| {
                    let ab = a.wedge(b).expect("same level");
                    classes.iter().position(|c| *c == ab)
                })
                .collect()
        })
        .collect();
    let listed: Vec<Value> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| json!({ "index": i, "values": c.values() }))
        .collect();
    Ok(Report::new(
        setup,
        "loop-table",
        json!({
            "level": spec.level,
            "support": spec.support,
            "class_count": classes.len(),
            "classes": listed,
            "wedge_table": table,
            "rank": rank_report(&cod),
        }),
    ))
}

/// Completion of the geometric partial sums `sum_{i<n} (p - 1) p^i`.
pub fn complete_demo(setup: &Setup) -> Result<Report, DemoError> {
    let c = &setup.scenario.complete;
    let seq = checks::geometric_fixture(setup.prime, c.terms);
    let limit = complete(&seq, setup.prime, c.precision)?;
    let expected = setup.prime.pow(c.precision) - 1u32;
    let characters = seq
        .iter()
        .map(|x| character(x, setup.prime, c.precision))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Report::new(
        setup,
        "complete",
        json!({
            "precision": c.precision,
            "partial_sums": seq.iter().map(|x| x.get(1).to_string()).collect::<Vec<_>>(),
            "characters": characters,
            "limit": limit,
            "expected": big(&expected),
            "matches": *limit.entry(1).value() == expected,
        }),
    ))
}

/// Rank and divisibility comparisons across all levels.
pub fn summary(setup: &Setup) -> Result<Report, DemoError> {
    let s = &setup.scenario;
    let ranks = checks::codomain_levels(&setup.codomain, s.depth)?
        .iter()
        .map(rank_report)
        .collect::<Vec<_>>();
    let divisibility = (1..=s.depth)
        .map(|k| {
            let g = group_order(&setup.manifold, k)?;
            Ok(json!({
                "level": k,
                "points": big(&g.points),
                "verified_exponent": g.factorial_exponent,
                "factorial_divides": g.factorial_divides,
                "card_exponent": g.card_exponent,
                "literal_exponent": g.literal_exponent,
                "literal_card_divides": g.literal_card_divides,
                "literal_factorial_divides": g.literal_factorial_divides,
            }))
        })
        .collect::<Result<Vec<_>, padic_limits::Error>>()?;
    let limit = complete(
        &checks::geometric_fixture(setup.prime, s.complete.terms),
        setup.prime,
        s.complete.precision,
    )?;
    Ok(Report::new(
        setup,
        "report",
        json!({ "ranks": ranks, "divisibility": divisibility, "geometric_limit": limit }),
    ))
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// CSV rendering: one row per check, level, class or coordinate.
pub fn to_csv(report: &Report) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let b = &report.body;
    let rows = |key: &str| {
        b.get(key)
            .and_then(Value::as_array)
            .cloned()
            .unwrap_or_default()
    };
    let mut write = |row: Vec<String>| w.write_record(&row).expect("in-memory write");
    match report.command.as_str() {
        "verify" => {
            write(vec![
                "name".into(),
                "status".into(),
                "cases".into(),
                "law".into(),
            ]);
            for r in rows("checks") {
                write(vec![
                    cell(&r["name"]),
                    cell(&r["status"]),
                    cell(&r["cases"]),
                    cell(&r["violation"]["law"]),
                ]);
            }
        }
        "diff-tower" => {
            let cols = [
                "level",
                "points",
                "order",
                "factorial_exponent",
                "factorial_divides",
                "card_exponent",
                "literal_exponent",
                "literal_card_divides",
                "literal_factorial_divides",
            ];
            write(cols.iter().map(|c| c.to_string()).collect());
            for r in rows("levels") {
                write(cols.iter().map(|c| cell(&r[*c])).collect());
            }
        }
        "loop-table" => {
            let classes = rows("classes");
            let mut header = vec!["class".to_string(), "values".to_string()];
            header.extend((0..classes.len()).map(|j| format!("wedge_{j}")));
            write(header);
            for (i, c) in classes.iter().enumerate() {
                let mut row = vec![i.to_string(), cell(&c["values"])];
                row.extend(
                    b["wedge_table"][i]
                        .as_array()
                        .into_iter()
                        .flatten()
                        .map(cell),
                );
                write(row);
            }
        }
        "complete" => {
            write(vec!["label".into(), "value".into()]);
            if let Some(entries) = b["limit"].as_object() {
                for (label, v) in entries {
                    write(vec![label.clone(), cell(v)]);
                }
            }
        }
        _ => {
            write(vec![
                "kind".into(),
                "level".into(),
                "computed".into(),
                "claimed".into(),
            ]);
            for r in rows("ranks") {
                write(vec![
                    "rank".into(),
                    cell(&r["level"]),
                    cell(&r["computed_rank"]),
                    cell(&r["paper_claimed_rank"]),
                ]);
            }
            for r in rows("divisibility") {
                write(vec![
                    "divisibility_exponent".into(),
                    cell(&r["level"]),
                    cell(&r["verified_exponent"]),
                    cell(&r["literal_exponent"]),
                ]);
            }
        }
    }
    String::from_utf8(w.into_inner().expect("flushed")).expect("utf-8")
}
