//! Acceptance criteria AC-1 through AC-11, one pass/fail line each, with
//! wall-clock limits. Exits nonzero when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use padic_limits::completion_characters::complete;
use padic_limits::level_rings::{PadicApprox, Prime};
use padic_limits::loop_monoid::LevelCodomain;
use padic_limits::manifold_tower::{Ball, ClopenManifold};
use padic_limits_cli::checks::{self, CheckResult, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

/// Id, title, time limit in seconds, runner.
type Criterion = (&'static str, &'static str, u64, fn() -> Outcome);

fn prime(p: u64) -> Prime {
    Prime::new(p).unwrap()
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0xac00 + tag)
}

/// Passing cases, or the violation as an error.
fn cases(r: CheckResult) -> Result<(u64, Value), String> {
    match r {
        Ok(Verdict::Pass { cases, details }) => Ok((cases, details)),
        Ok(Verdict::Skipped(reason)) => Err(format!("skipped: {reason}")),
        Ok(Verdict::Fail(v)) | Err(v) => Err(format!("{}: {}", v.law, v.witness)),
    }
}

fn ball(p: u64, center: u64, s: u32) -> Ball {
    Ball::new(
        vec![PadicApprox::from_integer(prime(p), center, s.max(1) + 1).unwrap()],
        s,
    )
    .unwrap()
}

fn manifold(p: u64, balls: Vec<Ball>) -> ClopenManifold {
    ClopenManifold::new(prime(p), balls, None).unwrap()
}

fn pointed(m: ClopenManifold) -> ClopenManifold {
    let base = m.balls()[0]
        .center()
        .iter()
        .map(|c| PadicApprox::from_integer(m.prime(), c.value(), 8).unwrap())
        .collect();
    m.with_base_point(base).unwrap()
}

fn unit(p: u64, dim: usize) -> ClopenManifold {
    ClopenManifold::unit_ball(prime(p), dim).unwrap()
}

fn codomain(n: &ClopenManifold, k: u32) -> LevelCodomain {
    LevelCodomain::from_manifold(&pointed(n.clone()), k).unwrap()
}

fn ac1() -> Outcome {
    let mut total = 0;
    for p in [2u64, 3, 5] {
        total += cases(checks::level_homomorphism(prime(p), 5, 1000, &mut rng(1)))?.0;
    }
    Ok(format!("{total} random pairs, p in {{2,3,5}}, levels <= 5"))
}

/// Manifolds with `|M_1| <= 3`.
fn small_m1() -> Vec<ClopenManifold> {
    vec![
        unit(2, 1),
        unit(3, 1),
        manifold(3, vec![ball(3, 0, 1), ball(3, 1, 1)]),
        manifold(2, vec![ball(2, 1, 1), ball(2, 0, 2)]),
        manifold(3, vec![ball(3, 2, 2)]),
    ]
}

fn ac2() -> Outcome {
    let ms = small_m1();
    let mut r = rng(2);
    let (mut maps, mut perms) = (0, 0);
    for (i, m) in ms.iter().enumerate() {
        for n in ms.iter().filter(|n| n.prime() == m.prime()) {
            let depth = r.gen_range(1..=4);
            maps += cases(checks::tower_composition(m, n, depth, 40, &mut r))?.0;
        }
        let depth = 1 + i as u32 % 4;
        perms += cases(checks::perm_tower_laws(m, depth.max(2), 100, false, &mut r))?.0;
    }
    if maps < 500 || perms < 500 {
        return Err(format!(
            "only {maps} map pairs and {perms} permutation towers"
        ));
    }
    Ok(format!(
        "{maps} map-tower pairs, {perms} permutation towers"
    ))
}

fn ac3() -> Outcome {
    // every level with n_k <= 5 of these manifolds
    let configs = [
        unit(2, 1),
        unit(3, 1),
        unit(5, 1),
        unit(2, 2),
        manifold(2, vec![ball(2, 0, 2)]),
        manifold(2, vec![ball(2, 1, 1), ball(2, 0, 2)]),
        manifold(3, vec![ball(3, 0, 1), ball(3, 1, 1)]),
        manifold(3, vec![ball(3, 0, 1), ball(3, 1, 2), ball(3, 2, 2)]),
    ];
    let mut seen = std::collections::BTreeSet::new();
    for m in &configs {
        let (_, details) = cases(checks::hom_enumeration(m, 6, 5, 50, &mut rng(3)))?;
        for level in details["levels"].as_array().unwrap() {
            seen.insert(level["points"].as_u64().unwrap());
        }
    }
    if seen != (1..=5).collect() {
        return Err(format!("n_k values covered: {seen:?}"));
    }
    Ok(format!(
        "{} manifolds, n_k in {seen:?}, |Hom| = n_k! and group axioms hold",
        configs.len()
    ))
}

/// Random multi-ball manifolds: 2 to 4 disjoint balls, p in {2, 3}.
fn multi_ball(r: &mut ChaCha8Rng) -> ClopenManifold {
    loop {
        let p = [2u64, 3][r.gen_range(0..2)];
        let dim = r.gen_range(1..=2);
        let mut balls: Vec<Ball> = Vec::new();
        for _ in 0..r.gen_range(2..=6) {
            let s = r.gen_range(1..=3);
            let center = (0..dim)
                .map(|_| PadicApprox::from_integer(prime(p), r.gen_range(0..p.pow(s)), s).unwrap())
                .collect();
            let mut candidate = balls.clone();
            candidate.push(Ball::new(center, s).unwrap());
            if ClopenManifold::new(prime(p), candidate.clone(), None).is_ok() {
                balls = candidate;
            }
        }
        if balls.len() >= 2 && balls.len() <= 4 {
            return ClopenManifold::new(prime(p), balls, None).unwrap();
        }
    }
}

fn ac4() -> Outcome {
    let mut r = rng(4);
    let mut lines = Vec::new();
    for _ in 0..20 {
        let m = multi_ball(&mut r);
        let (_, details) = cases(checks::divisibility(&m, 4, 100_000))?;
        let top = details["levels"]
            .as_array()
            .unwrap()
            .last()
            .unwrap()
            .clone();
        lines.push(format!(
            "p={} balls={} n_4={} b={} literal={}",
            m.prime().get(),
            m.balls().len(),
            top["points"],
            top["verified_exponent"],
            top["literal_exponent"]
        ));
    }
    Ok(format!(
        "20 manifolds, (p^b)! | n_k! at k = 1..4\n      {}",
        lines.join("\n      ")
    ))
}

fn ac5() -> Outcome {
    let mut total = 0;
    for (p, n) in [(2u64, 67), (3, 67), (5, 66)] {
        total += cases(checks::polynomial_projection(prime(p), 4, n, &mut rng(5)))?.0;
    }
    Ok(format!("{total} polynomials, levels <= 4"))
}

fn ac6() -> Outcome {
    let mut total = 0;
    for (p, n) in [(2u64, 25), (3, 25), (5, 25), (7, 25)] {
        total += cases(checks::mahler_roundtrip(prime(p), 8, 6, n, &mut rng(6)))?.0;
    }
    Ok(format!("{total} functions, M_max <= 8, precision <= 6"))
}

fn ac7() -> Outcome {
    // codomains with 1, 2 and 3 nonzero values
    let cods = [
        codomain(&unit(2, 1), 1),
        codomain(&unit(3, 1), 1),
        codomain(&unit(2, 1), 2),
        codomain(&unit(2, 2), 1),
    ];
    let mut triples = 0;
    for cod in &cods {
        let (n, details) = cases(checks::loop_laws(cod, 3, 1000, u64::MAX, 0, &mut rng(7)))?;
        if details["exhaustive"] != Value::Bool(true) {
            return Err("triples were sampled".into());
        }
        triples += n;
    }
    let z2 = pointed(unit(2, 1));
    let levels = checks::codomain_levels(&z2, 3).unwrap();
    let conn = cases(checks::connecting_maps(&levels, 3, 1000, 300, &mut rng(7)))?.0;
    let z3 = pointed(unit(3, 1));
    let levels = checks::codomain_levels(&z3, 2).unwrap();
    let conn3 = cases(checks::connecting_maps(&levels, 3, 1000, 300, &mut rng(7)))?.0;
    Ok(format!(
        "{triples} triples exhaustively, {} connecting-map pairs",
        conn + conn3
    ))
}

fn ac8() -> Outcome {
    let cods = [
        codomain(&manifold(2, vec![ball(2, 0, 2)]), 1),
        codomain(&unit(2, 1), 1),
        codomain(&unit(3, 1), 1),
        codomain(&manifold(2, vec![ball(2, 1, 1), ball(2, 0, 2)]), 2),
    ];
    let mut total = 0;
    for cod in &cods {
        total += cases(checks::canonicalization(cod, 4))?.0;
    }
    Ok(format!(
        "{total} map pairs, domains <= 4, codomains of size 1..3"
    ))
}

fn ac9() -> Outcome {
    let cods = [
        codomain(&unit(2, 1), 1),
        codomain(&unit(3, 1), 1),
        codomain(&unit(2, 1), 2),
        codomain(&unit(2, 2), 1),
    ];
    let mut lines = Vec::new();
    for cod in &cods {
        let (_, d) = cases(checks::grothendieck_structure(
            cod,
            3,
            1000,
            50,
            &mut rng(9),
        ))?;
        lines.push(format!(
            "card(N_k)={} computed rank={} claimed n_k={}",
            d["codomain_size"], d["computed_rank"], d["paper_claimed_rank"]
        ));
    }
    Ok(format!(
        "embed injective, 50 homomorphisms each\n      {}",
        lines.join("\n      ")
    ))
}

fn ac10() -> Outcome {
    let mut total = 0;
    for p in [2u64, 3, 5] {
        total += cases(checks::completion_characters(
            prime(p),
            6,
            8,
            100,
            &mut rng(10),
        ))?
        .0;
        for s in 1..=6 {
            let limit = complete(&checks::geometric_fixture(prime(p), 8), prime(p), s)
                .map_err(|e| e.to_string())?;
            if *limit.entry(1).value() != prime(p).pow(s) - BigUint::from(1u32) {
                return Err(format!(
                    "geometric fixture at p={p}, s={s} gives {}",
                    limit.entry(1)
                ));
            }
        }
    }
    Ok(format!(
        "{total} character cases, s <= 6, geometric fixture = -1 mod p^s"
    ))
}

fn ac11() -> Outcome {
    let dir = std::env::temp_dir().join(format!("padic-limits-ac11-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let cfg = dir.join("scenario.toml");
    std::fs::write(&cfg, "prime = 3\ndepth = 2\n[bounds]\ncases = 40\n")
        .map_err(|e| e.to_string())?;
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_padic-limits"))
            .args(["verify", "--seed", "20240917", "--config"])
            .arg(&cfg)
            .output()
            .map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    std::fs::remove_dir_all(&dir).ok();
    if a.status.code() != Some(0) || b.status.code() != Some(0) {
        return Err(format!(
            "verify exited with {:?} and {:?}",
            a.status.code(),
            b.status.code()
        ));
    }
    if a.stdout != b.stdout {
        return Err("reports differ".into());
    }
    Ok(format!(
        "two verify runs, {} identical bytes",
        a.stdout.len()
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("AC-1", "level homomorphisms", 1, ac1),
        ("AC-2", "tower compatibility", 5, ac2),
        ("AC-3", "Hom(M_k) enumeration", 10, ac3),
        ("AC-4", "factorial divisibility", 1, ac4),
        ("AC-5", "polynomial projection", 5, ac5),
        ("AC-6", "Mahler round-trip", 1, ac6),
        ("AC-7", "loop monoid laws", 5, ac7),
        ("AC-8", "canonicalization", 10, ac8),
        ("AC-9", "Grothendieck structure", 5, ac9),
        ("AC-10", "completion characters", 1, ac10),
        ("AC-11", "determinism", 30, ac11),
    ];
    let suite = Instant::now();
    let mut failures = 0;
    for (id, title, limit, run) in criteria {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > Duration::from_secs(limit) => {
                Err(format!("{msg}; exceeded {limit}s"))
            }
            other => other,
        };
        let (tag, msg) = match outcome {
            Ok(msg) => ("PASS", msg),
            Err(msg) => {
                failures += 1;
                ("FAIL", msg)
            }
        };
        println!(
            "[{tag}] {id} {title} ({:.2}s, limit {limit}s): {msg}",
            elapsed.as_secs_f64()
        );
    }
    let total = suite.elapsed();
    if total > Duration::from_secs(30) {
        failures += 1;
        println!(
            "[FAIL] suite runtime {:.2}s exceeds 30s",
            total.as_secs_f64()
        );
    }
    println!(
        "{} of 11 criteria passed in {:.2}s",
        11 - failures.min(11),
        total.as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
