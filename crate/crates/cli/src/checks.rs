//! Invariant checks. Each check compares library results against a direct
//! recomputation and stops at the first counterexample.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use itertools::Itertools;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use padic_limits::completion_characters::{
    character, complete, density_witness, IntVector, PadicVector,
};
use padic_limits::diff_profinite::{
    enumerate_hom, group_order, weak_distance, LevelPerm, PermTower,
};
use padic_limits::function_tower::{
    compose_towers, mahler_coefficients, project_function, project_polynomial, MapTower,
    PointOracle,
};
use padic_limits::grothendieck::{rank_report, universal_extend, GrothElem};
use padic_limits::level_rings::{Level, PadicApprox, Prime, Residue, ResidueVector};
use padic_limits::loop_monoid::{
    canonicalize, class_count, enumerate_classes, LevelCodomain, LevelLoopClass,
};
use padic_limits::manifold_tower::ClopenManifold;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

/// A counterexample to a named law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub law: String,
    pub witness: Value,
}

impl From<padic_limits::Error> for Violation {
    fn from(e: padic_limits::Error) -> Self {
        Violation {
            law: "library operation succeeds on valid input".into(),
            witness: json!({ "error": e.to_string() }),
        }
    }
}

fn violation(law: &str, witness: Value) -> Violation {
    Violation {
        law: law.into(),
        witness,
    }
}

macro_rules! ensure {
    ($cond:expr, $law:expr, $witness:expr) => {
        if !$cond {
            return Err(violation($law, $witness));
        }
    };
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass { cases: u64, details: Value },
    Skipped(String),
    Fail(Violation),
}

impl Verdict {
    pub fn passed(&self) -> bool {
        !matches!(self, Verdict::Fail(_))
    }
}

pub type CheckResult = Result<Verdict, Violation>;

fn pass(cases: u64) -> CheckResult {
    Ok(Verdict::Pass {
        cases,
        details: Value::Null,
    })
}

fn random_below_power(rng: &mut ChaCha8Rng, prime: Prime, k: Level) -> BigUint {
    let p = BigUint::from(prime.get());
    (0..k).fold(BigUint::zero(), |acc, _| {
        acc * &p + BigUint::from(rng.gen_range(0..prime.get()))
    })
}

fn random_padic(rng: &mut ChaCha8Rng, prime: Prime, precision: Level) -> PadicApprox {
    let digits = (0..precision)
        .map(|_| rng.gen_range(0..prime.get()))
        .collect();
    PadicApprox::from_digits(prime, digits).expect("digits are below p")
}

/// Reduction `Z/p^l -> Z/p^k` preserves sums and products, and the digit
/// projection of a p-adic approximation is its truncated value.
pub fn level_homomorphism(
    prime: Prime,
    max_level: Level,
    cases: u64,
    rng: &mut ChaCha8Rng,
) -> CheckResult {
    for _ in 0..cases {
        let l = rng.gen_range(1..=max_level);
        let k = rng.gen_range(1..=l);
        let (a, b) = (
            random_below_power(rng, prime, l),
            random_below_power(rng, prime, l),
        );
        let pk = prime.pow(k);
        let ra = Residue::new(prime, l, BigInt::from(a.clone()))?;
        let rb = Residue::new(prime, l, BigInt::from(b.clone()))?;
        let sum = ra.add(&rb)?.reduce(k)?;
        let prod = ra.mul(&rb)?.reduce(k)?;
        let w = json!({ "p": prime.get(), "l": l, "k": k, "a": a.to_string(), "b": b.to_string() });
        ensure!(
            *sum.value() == (&a + &b) % &pk,
            "pi^l_k(a + b) = (a + b) mod p^k",
            w
        );
        ensure!(
            *prod.value() == (&a * &b) % &pk,
            "pi^l_k(a * b) = (a * b) mod p^k",
            w
        );
        ensure!(
            sum == ra.reduce(k)?.add(&rb.reduce(k)?)?,
            "pi^l_k(a + b) = pi^l_k(a) + pi^l_k(b)",
            w
        );
        ensure!(
            prod == ra.reduce(k)?.mul(&rb.reduce(k)?)?,
            "pi^l_k(a * b) = pi^l_k(a) * pi^l_k(b)",
            w
        );
        let x = PadicApprox::from_digits(prime, ra.digits())?;
        ensure!(x.project(l)? == ra, "pi_l(sum d_i p^i) = a", w);
        ensure!(x.project(k)? == ra.reduce(k)?, "pi^l_k ∘ pi_l = pi_k", w);
    }
    pass(cases)
}

fn in_ball_oracle(m: &ClopenManifold, point: &[u64], k: Level) -> bool {
    let p = m.prime().get();
    m.balls().iter().any(|b| {
        let j = k.min(b.radius_exp()) as usize;
        b.center()
            .iter()
            .zip(point)
            .all(|(c, &x)| (0..j).all(|i| c.digits()[i] == (x / p.pow(i as u32)) % p))
    })
}

/// `|M_k|` matches a scan of `(Z/p^k)^m` when that is small, the ball sum
/// `sum_i p^(m(k - s_i))` once `k` resolves every ball, and reduction maps
/// `M_l` onto `M_k`.
pub fn cardinality(m: &ClopenManifold, depth: Level) -> CheckResult {
    let p = m.prime().get();
    let dim = m.dim() as u32;
    let mut cases = 0;
    let sets = (1..=depth)
        .map(|k| m.discretize(k))
        .collect::<Result<Vec<_>, _>>()?;
    for k in 1..=depth {
        let mk = &sets[k as usize - 1];
        let w = json!({ "level": k, "points": mk.len() });
        let total = (p as u128).checked_pow(k * dim).unwrap_or(u128::MAX);
        if total <= 1 << 14 {
            let pk = p.pow(k);
            let scanned = (0..total as u64)
                .filter(|&idx| {
                    let point: Vec<u64> = (0..dim).map(|i| (idx / pk.pow(i)) % pk).collect();
                    in_ball_oracle(m, &point, k)
                })
                .count();
            ensure!(
                mk.len() == scanned,
                "|M_k| equals the number of residues in some ball",
                w
            );
            cases += 1;
        }
        if m.balls().iter().all(|b| b.radius_exp() <= k) {
            let closed: BigUint = m
                .balls()
                .iter()
                .map(|b| BigUint::from(p).pow(dim * (k - b.radius_exp())))
                .sum();
            ensure!(
                BigUint::from(mk.len()) == closed,
                "|M_k| = sum_i p^(m(k - s_i))",
                w
            );
            cases += 1;
        }
        for l in k..=depth {
            ensure!(
                sets[l as usize - 1].reduce(k)? == *mk,
                "pi^l_k maps M_l onto M_k",
                json!({ "k": k, "l": l })
            );
        }
    }
    pass(cases)
}

/// Levelwise composition of random compatible towers `M -> N -> M` equals
/// the projection of the composed point oracles.
pub fn tower_composition(
    m: &ClopenManifold,
    n: &ClopenManifold,
    depth: Level,
    cases: u64,
    rng: &mut ChaCha8Rng,
) -> CheckResult {
    for case in 0..cases {
        let g = MapTower::random(m, n, depth, rng)?;
        let f = MapTower::random(n, m, depth, rng)?;
        let fg = compose_towers(&f, &g)?;
        let oracle = g.to_oracle().then(&f.to_oracle());
        for k in 1..=depth {
            let projected = project_function(&oracle, m, m, k)?;
            ensure!(
                fg.level(k) == Some(&projected),
                "(f ∘ g)_k = f_k ∘ g_k",
                json!({ "case": case, "level": k })
            );
        }
        let id = MapTower::identity(m, depth)?;
        ensure!(
            compose_towers(&fg, &id)? == fg,
            "f ∘ id = f",
            json!({ "case": case })
        );
    }
    pass(cases)
}

/// Images of `x` under the coarse projection: `sigma_k(pi(x)) = pi(sigma_l(x))`
/// for every `k < l`, checked point by point.
pub fn compatibility_witness(levels: &[LevelPerm]) -> Option<Value> {
    for (li, sl) in levels.iter().enumerate() {
        for sk in &levels[..li] {
            let k = sk.level();
            for x in sl.domain().points() {
                let lhs = sl.apply(x).and_then(|y| y.reduce(k).ok());
                let rhs = x.reduce(k).ok().and_then(|xk| sk.apply(&xk).cloned());
                if lhs.is_none() || lhs != rhs {
                    return Some(json!({
                        "k": k,
                        "l": sl.level(),
                        "point": x,
                        "pi(sigma_l(x))": lhs,
                        "sigma_k(pi(x))": rhs,
                    }));
                }
            }
        }
    }
    None
}

/// A family that is a permutation at every level but whose top level swaps
/// two points lying over different points one level down.
pub fn faulty_perm_family(m: &ClopenManifold, depth: Level) -> Result<Vec<LevelPerm>, Violation> {
    let mut levels: Vec<LevelPerm> = (1..=depth)
        .map(|k| Ok(LevelPerm::identity(Arc::new(m.discretize(k)?))))
        .collect::<Result<_, padic_limits::Error>>()?;
    let top = levels.pop().expect("depth >= 1");
    let points = top.domain().points();
    let mut mapping: Vec<usize> = (0..points.len()).collect();
    let coarse = depth - 1;
    let j = (1..points.len())
        .find(|&j| points[j].reduce(coarse).ok() != points[0].reduce(coarse).ok())
        .ok_or_else(|| violation("fault fixture needs two fibers", json!({ "depth": depth })))?;
    mapping.swap(0, j);
    levels.push(LevelPerm::new(top.domain().clone(), mapping)?);
    Ok(levels)
}

/// Random permutation towers satisfy the compatibility law, and inversion
/// and composition are levelwise: `pi_k(sigma^-1) = sigma_k^-1`.
pub fn perm_tower_laws(
    m: &ClopenManifold,
    depth: Level,
    cases: u64,
    inject_fault: bool,
    rng: &mut ChaCha8Rng,
) -> CheckResult {
    const COMPAT: &str = "pi^l_k(sigma_l(x)) = sigma_k(pi^l_k(x))";
    if inject_fault {
        let family = faulty_perm_family(m, depth)?;
        if let Some(mut w) = compatibility_witness(&family) {
            w["library_rejects"] = json!(PermTower::new(family).is_err());
            w["source"] = json!("injected fault");
            return Err(violation(COMPAT, w));
        }
    }
    for case in 0..cases {
        let a = PermTower::random(m, depth, rng)?;
        let b = PermTower::random(m, depth, rng)?;
        if let Some(mut w) = compatibility_witness(a.levels()) {
            w["case"] = json!(case);
            return Err(violation(COMPAT, w));
        }
        let inv = a.invert();
        for k in 1..=depth {
            let (ak, ik) = (
                a.level(k).expect("k <= depth"),
                inv.level(k).expect("k <= depth"),
            );
            ensure!(
                *ik == ak.inverse(),
                "pi_k(sigma^-1) = sigma_k^-1",
                json!({ "case": case, "level": k })
            );
            ensure!(
                ak.domain()
                    .points()
                    .iter()
                    .all(|x| ik.apply(ak.apply(x).expect("x in M_k")) == Some(x)),
                "sigma_k^-1(sigma_k(x)) = x",
                json!({ "case": case, "level": k })
            );
        }
        let ab = a.compose(&b)?;
        for k in 1..=depth {
            let (ak, bk, abk) = (
                a.level(k).unwrap(),
                b.level(k).unwrap(),
                ab.level(k).unwrap(),
            );
            ensure!(
                abk.domain()
                    .points()
                    .iter()
                    .all(|x| abk.apply(x) == bk.apply(x).and_then(|y| ak.apply(y))),
                "(sigma ∘ tau)_k = sigma_k ∘ tau_k",
                json!({ "case": case, "level": k })
            );
        }
        ensure!(
            a.compose(&inv)?.is_identity(),
            "sigma ∘ sigma^-1 = id",
            json!({ "case": case })
        );
    }
    pass(cases)
}

fn factorial_u128(n: usize) -> Option<u128> {
    (1..=n as u128).try_fold(1u128, |acc, i| acc.checked_mul(i))
}

/// `Hom(M_k)` enumerates to `n_k!` distinct bijections forming a group, for
/// every level with `n_k <= max_points`.
pub fn hom_enumeration(
    m: &ClopenManifold,
    max_level: Level,
    max_points: usize,
    cases: u64,
    rng: &mut ChaCha8Rng,
) -> CheckResult {
    let mut checked = Vec::new();
    for k in 1..=max_level {
        let mk = Arc::new(m.discretize(k)?);
        let n = mk.len();
        if n > max_points {
            break;
        }
        let all = enumerate_hom(&mk, factorial_u128(max_points).unwrap_or(u128::MAX))?;
        let w = json!({ "level": k, "points": n, "enumerated": all.len() });
        ensure!(
            Some(all.len() as u128) == factorial_u128(n),
            "|Hom(M_k)| = n_k!",
            w
        );
        let index: HashMap<&[usize], usize> = all
            .iter()
            .enumerate()
            .map(|(i, s)| (s.mapping(), i))
            .collect();
        ensure!(
            index.len() == all.len(),
            "enumerated bijections are distinct",
            w
        );
        ensure!(
            all.iter()
                .all(|s| s.mapping().iter().sorted().copied().eq(0..n)),
            "every element is a bijection of M_k",
            w
        );
        let id = LevelPerm::identity(mk.clone());
        ensure!(
            index.contains_key(id.mapping()),
            "the identity is enumerated",
            w
        );
        for a in &all {
            ensure!(
                a.compose(&id)? == *a && id.compose(a)? == *a,
                "sigma ∘ id = id ∘ sigma = sigma",
                w
            );
            let inv = a.inverse();
            ensure!(
                index.contains_key(inv.mapping()),
                "inverses are enumerated",
                w
            );
            ensure!(a.compose(&inv)?.is_identity(), "sigma ∘ sigma^-1 = id", w);
            for b in &all {
                ensure!(
                    index.contains_key(a.compose(b)?.mapping()),
                    "Hom(M_k) is closed under composition",
                    w
                );
            }
        }
        // associativity on every triple for n_k <= 4, sampled above that
        let triples: Vec<(usize, usize, usize)> = if all.len() <= 24 {
            (0..all.len())
                .cartesian_product(0..all.len())
                .cartesian_product(0..all.len())
                .map(|((a, b), c)| (a, b, c))
                .collect()
        } else {
            (0..cases * 20)
                .map(|_| {
                    (
                        rng.gen_range(0..all.len()),
                        rng.gen_range(0..all.len()),
                        rng.gen_range(0..all.len()),
                    )
                })
                .collect()
        };
        for (a, b, c) in triples {
            let (a, b, c) = (&all[a], &all[b], &all[c]);
            ensure!(
                a.compose(b)?.compose(c)? == a.compose(&b.compose(c)?)?,
                "(a ∘ b) ∘ c = a ∘ (b ∘ c)",
                w
            );
        }
        checked.push(json!({ "level": k, "points": n, "order": all.len() }));
    }
    Ok(Verdict::Pass {
        cases: checked.len() as u64,
        details: json!({ "levels": checked }),
    })
}

fn factorial_big(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// For each level, `(p^b)!` divides `n_k!` with `b` the largest exponent
/// such that `p^b <= n_k`, and `p^e | n_k` for `e = m min_i(k - s_i)`. The
/// literal ball-sum exponent is reported beside the verified one.
pub fn divisibility(m: &ClopenManifold, depth: Level, max_points: u64) -> CheckResult {
    let p = m.prime().get();
    let mut levels = Vec::new();
    for k in 1..=depth {
        let n = m.discretize(k)?.len() as u64;
        if n > max_points {
            levels.push(json!({ "level": k, "points": n, "skipped": "n_k exceeds the bound" }));
            continue;
        }
        let report = group_order(m, k)?;
        let mut b = 0u32;
        while (p as u128).pow(b + 1) <= n as u128 {
            b += 1;
        }
        let w = json!({ "level": k, "points": n, "exponent": b });
        ensure!(report.points == BigUint::from(n), "n_k = |M_k|", w);
        ensure!(report.order == factorial_big(n), "|Hom(M_k)| = n_k!", w);
        ensure!(
            report.factorial_exponent == b,
            "b = max { b : p^b <= n_k }",
            w
        );
        let divides = (factorial_big(n) % factorial_big(p.pow(b))).is_zero();
        ensure!(
            divides && report.factorial_divides,
            "(p^b)! divides n_k!",
            w
        );
        if let Some(e) = report.card_exponent {
            let min_gap = m
                .balls()
                .iter()
                .map(|ball| k - ball.radius_exp())
                .min()
                .unwrap_or(0);
            ensure!(e == m.dim() as u32 * min_gap, "e = m min_i(k - s_i)", w);
            ensure!(
                n.is_multiple_of(p.pow(e)) && report.card_exponent_divides == Some(true),
                "p^e divides n_k",
                w
            );
        }
        levels.push(json!({
            "level": k,
            "points": n,
            "verified_exponent": b,
            "factorial_divides": report.factorial_divides,
            "card_exponent": report.card_exponent,
            "literal_exponent": report.literal_exponent,
            "literal_card_divides": report.literal_card_divides,
            "literal_factorial_divides": report.literal_factorial_divides,
        }));
    }
    Ok(Verdict::Pass {
        cases: depth as u64,
        details: json!({ "levels": levels }),
    })
}

fn eval_poly(coeffs: &[BigInt], x: &BigInt) -> BigInt {
    coeffs
        .iter()
        .rev()
        .fold(BigInt::zero(), |acc, c| acc * x + c)
}

fn mod_floor(x: &BigInt, m: &BigUint) -> BigUint {
    let m = BigInt::from(m.clone());
    (((x % &m) + &m) % &m).to_biguint().expect("nonnegative")
}

/// Level-`k` shadows of random polynomials with p-adic integer coefficients
/// are well defined on residues and agree with pointwise projection.
pub fn polynomial_projection(
    prime: Prime,
    max_level: Level,
    cases: u64,
    rng: &mut ChaCha8Rng,
) -> CheckResult {
    let z = ClopenManifold::unit_ball(prime, 1)?;
    for case in 0..cases {
        let k = rng.gen_range(1..=max_level);
        let degree = rng.gen_range(0..=5);
        let coeffs: Vec<PadicApprox> = (0..=degree)
            .map(|_| random_padic(rng, prime, k + 2))
            .collect();
        let ints: Vec<BigInt> = coeffs.iter().map(|c| BigInt::from(c.value())).collect();
        let map = project_polynomial(&coeffs, &z, k)?;
        let pk = prime.pow(k);
        let w = json!({ "case": case, "level": k, "coefficients": ints.iter().map(|c| c.to_string()).collect::<Vec<_>>() });
        for (x, y) in map.entries() {
            let xv = BigInt::from(x.coords()[0].clone());
            for _ in 0..3 {
                let lift = &xv
                    + BigInt::from(random_below_power(rng, prime, 3)) * BigInt::from(pk.clone());
                ensure!(
                    mod_floor(&eval_poly(&ints, &lift), &pk) == y.coords()[0],
                    "x = x' mod p^k implies f(x) = f(x') mod p^k",
                    w
                );
            }
        }
        let oracle = PointOracle::polynomial(prime, ints.clone(), k);
        ensure!(
            project_function(&oracle, &z, &z, k)? == map,
            "pi_k ∘ f = f_k ∘ pi_k",
            w
        );
    }
    pass(cases)
}

/// Mahler coefficients from finite differences reconstruct a random
/// integer table on `0..=M`.
pub fn mahler_roundtrip(
    prime: Prime,
    max_degree: u64,
    max_precision: Level,
    cases: u64,
    rng: &mut ChaCha8Rng,
) -> CheckResult {
    for case in 0..cases {
        let degree = rng.gen_range(0..=max_degree);
        let precision = rng.gen_range(1..=max_precision);
        let table: Vec<i64> = (0..=degree)
            .map(|_| rng.gen_range(-10_000..=10_000))
            .collect();
        let lookup = table.clone();
        let f = move |x: &PadicApprox| {
            let n = x.value().to_usize().expect("table argument");
            PadicApprox::from_integer(prime, lookup[n], x.precision()).expect("valid precision")
        };
        let series = mahler_coefficients(prime, f, degree, precision)?;
        let modulus = prime.pow(precision);
        for (n, &v) in table.iter().enumerate() {
            let x =
                PadicApprox::from_integer(prime, n as u64, series.required_input_precision() + 4)?;
            let y = series.eval(&x)?;
            ensure!(
                y.value() == mod_floor(&BigInt::from(v), &modulus),
                "sum_m a_m C(n, m) = f(n) mod p^K",
                json!({ "case": case, "n": n, "precision": precision, "table": table })
            );
        }
    }
    pass(cases)
}

/// The weak distance is symmetric, ultrametric and equals `p^-j` for the
/// first level `j` where the towers differ.
pub fn weak_metric(
    m: &ClopenManifold,
    depth: Level,
    cases: u64,
    rng: &mut ChaCha8Rng,
) -> CheckResult {
    let id = PermTower::identity(m, depth)?;
    for case in 0..cases {
        let t: Vec<PermTower> = (0..3)
            .map(|_| {
                PermTower::random(m, depth, rng)
                    .map(|r| if rng.gen_bool(0.3) { id.clone() } else { r })
            })
            .collect::<Result<_, _>>()?;
        let d = |a: &PermTower, b: &PermTower| weak_distance(a, b);
        let w = json!({ "case": case });
        let first = t[0]
            .levels()
            .iter()
            .zip(t[1].levels())
            .position(|(x, y)| x.mapping() != y.mapping())
            .map(|i| i as u32 + 1);
        ensure!(
            d(&t[0], &t[1])?.exponent() == first,
            "d(sigma, tau) = p^-(first differing level)",
            w
        );
        ensure!(
            d(&t[0], &t[1])? == d(&t[1], &t[0])?,
            "d(sigma, tau) = d(tau, sigma)",
            w
        );
        ensure!(d(&t[0], &t[0])?.is_zero(), "d(sigma, sigma) = 0", w);
        ensure!(
            d(&t[0], &t[2])? <= d(&t[0], &t[1])?.max(d(&t[1], &t[2])?),
            "d(a, c) <= max(d(a, b), d(b, c))",
            w
        );
    }
    pass(cases)
}

/// Classes of support at most `support`, or `None` when there are more
/// than `bound` of them.
pub fn bounded_classes(
    cod: &LevelCodomain,
    support: usize,
    bound: u64,
) -> Option<Vec<LevelLoopClass>> {
    let nonzero = cod.size() - 1;
    let count = class_count(nonzero, support)?;
    if count > bound as u128 {
        return None;
    }
    enumerate_classes(support + 1, cod, support, bound as u128).ok()
}

fn multiset(c: &LevelLoopClass) -> Vec<ResidueVector> {
    c.values().into_iter().cloned().collect()
}

/// Wedge is commutative, associative, unital and cancellative on classes
/// of bounded support; triples are exhaustive when at most
/// `exhaustive_limit`, otherwise sampled.
pub fn loop_laws(
    cod: &LevelCodomain,
    support: usize,
    bound: u64,
    exhaustive_limit: u64,
    cases: u64,
    rng: &mut ChaCha8Rng,
) -> CheckResult {
    let Some(classes) = bounded_classes(cod, support, bound) else {
        return Ok(Verdict::Skipped(format!(
            "more than {bound} classes at level {}",
            cod.level()
        )));
    };
    let n = classes.len();
    let unit = LevelLoopClass::unit(cod.level());
    for a in &classes {
        ensure!(
            a.wedge(&unit)? == *a && unit.wedge(a)? == *a,
            "a ∨ 0 = a",
            json!({ "a": multiset(a) })
        );
        for b in &classes {
            let ab = a.wedge(b)?;
            let w = json!({ "a": multiset(a), "b": multiset(b) });
            ensure!(ab == b.wedge(a)?, "a ∨ b = b ∨ a", w);
            let mut union = multiset(a);
            union.extend(multiset(b));
            union.sort();
            ensure!(multiset(&ab) == union, "a ∨ b is the multiset union", w);
        }
    }
    let exhaustive = (n as u64).pow(3) <= exhaustive_limit;
    let triples: Box<dyn Iterator<Item = (usize, usize, usize)>> = if exhaustive {
        Box::new(
            (0..n)
                .cartesian_product(0..n)
                .cartesian_product(0..n)
                .map(|((a, b), c)| (a, b, c)),
        )
    } else {
        let sample: Vec<_> = (0..cases * 50)
            .map(|_| {
                (
                    rng.gen_range(0..n),
                    rng.gen_range(0..n),
                    rng.gen_range(0..n),
                )
            })
            .collect();
        Box::new(sample.into_iter())
    };
    let mut count = 0u64;
    for (i, j, l) in triples {
        let (a, b, c) = (&classes[i], &classes[j], &classes[l]);
        let w = json!({ "a": multiset(a), "b": multiset(b), "c": multiset(c) });
        ensure!(
            a.wedge(b)?.wedge(c)? == a.wedge(&b.wedge(c)?)?,
            "(a ∨ b) ∨ c = a ∨ (b ∨ c)",
            w
        );
        ensure!(
            a.wedge(c)? != b.wedge(c)? || a == b,
            "a ∨ c = b ∨ c implies a = b",
            w
        );
        count += 1;
    }
    Ok(Verdict::Pass {
        cases: count,
        details: json!({ "level": cod.level(), "classes": n, "exhaustive": exhaustive }),
    })
}

/// Connecting maps send the unit to the unit, wedges to wedges, and
/// compose: `pi^m_k = pi^l_k ∘ pi^m_l`.
pub fn connecting_maps(
    codomains: &[LevelCodomain],
    support: usize,
    bound: u64,
    cases: u64,
    rng: &mut ChaCha8Rng,
) -> CheckResult {
    let top = codomains.last().expect("nonempty");
    let Some(classes) = bounded_classes(top, support, bound) else {
        return Ok(Verdict::Skipped(format!(
            "more than {bound} classes at level {}",
            top.level()
        )));
    };
    let mut count = 0;
    for cod in codomains {
        ensure!(
            LevelLoopClass::unit(top.level()).connecting(cod)?.is_unit(),
            "connecting maps preserve the unit",
            json!({ "level": cod.level() })
        );
    }
    for _ in 0..cases {
        let a = classes.choose(rng).expect("nonempty");
        let b = classes.choose(rng).expect("nonempty");
        for (k, cod) in codomains.iter().enumerate() {
            let w = json!({ "a": multiset(a), "b": multiset(b), "level": cod.level() });
            let ab = a.wedge(b)?.connecting(cod)?;
            ensure!(
                ab == a.connecting(cod)?.wedge(&b.connecting(cod)?)?,
                "pi(a ∨ b) = pi(a) ∨ pi(b)",
                w
            );
            for mid in &codomains[k..] {
                ensure!(
                    a.connecting(mid)?.connecting(cod)? == a.connecting(cod)?,
                    "pi^l_k ∘ pi^m_l = pi^m_k",
                    w
                );
            }
            // values of pi(a) are the nonzero reductions of the values of a
            let mut direct: Vec<ResidueVector> = multiset(a)
                .iter()
                .map(|v| v.reduce(cod.level()))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .filter(|v| v != cod.zero())
                .collect();
            direct.sort();
            ensure!(
                multiset(&a.connecting(cod)?) == direct,
                "pi reduces every value and drops zeros",
                w
            );
        }
        count += 1;
    }
    pass(count)
}

/// Orbits of based maps `{0..n-1} -> N_k` under bijections fixing the base
/// point coincide with fibers of the canonical form.
pub fn canonicalization(cod: &LevelCodomain, max_domain: usize) -> CheckResult {
    let values = cod.values().points().to_vec();
    let zero = values
        .iter()
        .position(|v| v == cod.zero())
        .expect("zero is a value");
    let mut cases = 0u64;
    for n in 1..=max_domain {
        let maps: Vec<Vec<usize>> = (1..n)
            .map(|_| 0..values.len())
            .multi_cartesian_product()
            .map(|tail| std::iter::once(zero).chain(tail).collect())
            .collect();
        let class_of = |f: &[usize]| {
            canonicalize(
                0,
                f.iter()
                    .enumerate()
                    .map(|(i, &v)| (i as u64, values[v].clone())),
                cod,
                n,
            )
        };
        let classes = maps
            .iter()
            .map(|f| class_of(f))
            .collect::<Result<Vec<_>, _>>()?;
        for (i, f) in maps.iter().enumerate() {
            let orbit: BTreeSet<Vec<usize>> = (1..n)
                .permutations(n - 1)
                .map(|perm| {
                    std::iter::once(f[0])
                        .chain(perm.iter().map(|&j| f[j]))
                        .collect()
                })
                .collect();
            for (j, g) in maps.iter().enumerate() {
                ensure!(
                    orbit.contains(g) == (classes[i] == classes[j]),
                    "f ~ g under based bijections iff their canonical forms agree",
                    json!({ "domain": n, "f": f, "g": g })
                );
                cases += 1;
            }
        }
        let listed: BTreeSet<LevelLoopClass> = enumerate_classes(n, cod, n, u128::MAX)?
            .into_iter()
            .collect();
        ensure!(
            listed == classes.into_iter().collect(),
            "enumerated classes are exactly the realized orbits",
            json!({ "domain": n })
        );
    }
    pass(cases)
}

fn rank_mod(mut rows: Vec<Vec<i64>>) -> usize {
    const Q: i64 = 1_000_000_007;
    let inv = |a: i64| {
        let (mut r, mut b, mut e) = (1i64, a.rem_euclid(Q), Q - 2);
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % Q;
            }
            b = b * b % Q;
            e >>= 1;
        }
        r
    };
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col].rem_euclid(Q) != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let scale = inv(rows[rank][col]);
        let pivot_row: Vec<i64> = rows[rank]
            .iter()
            .map(|x| x.rem_euclid(Q) * scale % Q)
            .collect();
        for (r, row) in rows.iter_mut().enumerate() {
            let f = row[col].rem_euclid(Q);
            if r != rank && f != 0 {
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = (*x - f * y).rem_euclid(Q);
                }
            }
        }
        rows[rank] = pivot_row;
        rank += 1;
    }
    rank
}

/// Rank of the abelian group generated by the listed classes subject to
/// `[0] = 0` and `[a ∨ b] = [a] + [b]`.
pub fn presented_rank(classes: &[LevelLoopClass]) -> usize {
    let index: HashMap<&LevelLoopClass, usize> =
        classes.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut rows = Vec::new();
    for (i, c) in classes.iter().enumerate() {
        if c.is_unit() {
            let mut r = vec![0i64; classes.len()];
            r[i] = 1;
            rows.push(r);
        }
    }
    for a in classes {
        for b in classes {
            if let Some(&i) = a.wedge(b).ok().as_ref().and_then(|ab| index.get(ab)) {
                let mut r = vec![0i64; classes.len()];
                r[i] += 1;
                r[index[a]] -= 1;
                r[index[b]] -= 1;
                rows.push(r);
            }
        }
    }
    classes.len() - rank_mod(rows)
}

/// The embedding of classes is injective, every element is a difference of
/// classes, the rank matches the presentation, and generator-defined
/// homomorphisms extend uniquely.
pub fn grothendieck_structure(
    cod: &LevelCodomain,
    support: usize,
    bound: u64,
    cases: u64,
    rng: &mut ChaCha8Rng,
) -> CheckResult {
    let Some(classes) = bounded_classes(cod, support, bound) else {
        return Ok(Verdict::Skipped(format!(
            "more than {bound} classes at level {}",
            cod.level()
        )));
    };
    let embedded: HashSet<Vec<(ResidueVector, i64)>> = classes
        .iter()
        .map(|c| {
            GrothElem::embed(c)
                .coords()
                .map(|(v, n)| (v.clone(), n))
                .collect()
        })
        .collect();
    ensure!(
        embedded.len() == classes.len(),
        "embed is injective",
        json!({ "level": cod.level() })
    );
    for case in 0..cases {
        let mut x = GrothElem::zero(cod.level());
        for _ in 0..rng.gen_range(0..6) {
            let c = GrothElem::embed(classes.choose(rng).expect("nonempty"));
            x = if rng.gen_bool(0.5) {
                x.add(&c)?
            } else {
                x.sub(&c)?
            };
        }
        let (a, b) = x.as_difference();
        ensure!(
            GrothElem::difference(&a, &b)? == x,
            "x = [a] - [b]",
            json!({ "case": case })
        );
    }
    // the presentation is small enough only at low support
    let small: Vec<LevelLoopClass> = classes
        .iter()
        .filter(|c| c.support_size() <= 2)
        .cloned()
        .collect();
    let presented = presented_rank(if classes.len() <= 40 {
        &classes
    } else {
        &small
    });
    let report = rank_report(cod);
    let w = json!({ "report": report, "presented_rank": presented });
    ensure!(
        report.computed_rank == presented,
        "rank equals the rank of the presented group",
        w
    );
    ensure!(
        report.computed_rank == cod.size() - 1,
        "rank = card(N_k) - 1",
        w
    );
    for case in 0..cases {
        let weights: HashMap<ResidueVector, i64> = cod
            .nonzero_values()
            .map(|v| (v.clone(), rng.gen_range(-20..=20)))
            .collect();
        let h = |c: &LevelLoopClass| c.counts().map(|(v, n)| weights[v] * n as i64).sum::<i64>();
        let ext = universal_extend(cod, h, support)?;
        for a in &classes {
            let b = classes.choose(rng).expect("nonempty");
            ensure!(
                ext.apply(&GrothElem::difference(a, b)?)? == h(a) - h(b),
                "H([a] - [b]) = h(a) - h(b)",
                json!({ "case": case, "a": multiset(a), "b": multiset(b) })
            );
        }
    }
    Ok(Verdict::Pass {
        cases,
        details: json!({
            "level": report.level,
            "codomain_size": report.codomain_size,
            "computed_rank": report.computed_rank,
            "paper_claimed_rank": report.paper_claimed_rank,
            "presented_rank": presented,
        }),
    })
}

/// Partial sums of `sum_i (p - 1) p^i`, one label.
pub fn geometric_fixture(prime: Prime, terms: u32) -> Vec<IntVector> {
    let q = BigInt::from(prime.get());
    (0..terms)
        .scan(BigInt::zero(), |acc, i| {
            *acc += (&q - 1) * q.pow(i);
            Some(IntVector::from_dense([acc.clone()]))
        })
        .collect()
}

/// Characters `eta_{p,s}` are surjective homomorphisms for `s <= precision`
/// and the geometric fixture completes to `-1`.
pub fn completion_characters(
    prime: Prime,
    precision: Level,
    terms: u32,
    cases: u64,
    rng: &mut ChaCha8Rng,
) -> CheckResult {
    let p = prime.get();
    let mut count = 0;
    for s in 1..=precision {
        let modulus = prime.pow(s);
        for _ in 0..cases {
            let x = IntVector::from_dense((0..4).map(|_| rng.gen_range(-100_000i64..100_000)));
            let y = IntVector::from_dense((0..4).map(|_| rng.gen_range(-100_000i64..100_000)));
            let w =
                json!({ "s": s, "x": x.entries().map(|(_, v)| v.to_string()).collect::<Vec<_>>() });
            let (cx, cy) = (character(&x, prime, s)?, character(&y, prime, s)?);
            ensure!(
                character(&x.add(&y), prime, s)? == cx.add(&cy)?,
                "eta(x + y) = eta(x) + eta(y)",
                w
            );
            ensure!(
                x.entries()
                    .all(|(l, v)| cx.entry(l).value() == &mod_floor(v, &modulus)),
                "eta reduces every coordinate mod p^s",
                w
            );
            let target = PadicVector::new(
                prime,
                s,
                (1..=3).map(|l| (l, BigInt::from(random_below_power(rng, prime, s)))),
            )?;
            ensure!(
                character(&density_witness(&target), prime, s)? == target,
                "eta(witness(t)) = t",
                json!({ "s": s, "target": target })
            );
            count += 1;
        }
        if modulus <= BigUint::from(256u32) {
            let m = modulus.to_u64().expect("small");
            for v in 0..m {
                let target = PadicVector::new(prime, s, [(1, BigInt::from(v))])?;
                ensure!(
                    character(&density_witness(&target), prime, s)? == target,
                    "eta is surjective",
                    json!({ "s": s, "value": v })
                );
                count += 1;
            }
        }
    }
    let s = precision.min(terms - 1);
    let limit = complete(&geometric_fixture(prime, terms), prime, s)?;
    let minus_one = prime.pow(s) - 1u32;
    ensure!(
        *limit.entry(1).value() == minus_one,
        "sum_i (p - 1) p^i = -1 in Z_p",
        json!({ "p": p, "s": s, "limit": limit })
    );
    let drifting: Vec<IntVector> = (0..4).map(|i| IntVector::from_dense([i])).collect();
    ensure!(
        complete(&drifting, prime, 1).is_err(),
        "sequences whose tail moves mod p^s have no limit",
        json!({ "sequence": [0, 1, 2, 3] })
    );
    Ok(Verdict::Pass {
        cases: count,
        details: json!({ "fixture_precision": s, "fixture_limit": limit.entry(1).value().to_string() }),
    })
}

/// Codomain levels `1..=depth` of a pointed manifold.
pub fn codomain_levels(
    n: &ClopenManifold,
    depth: Level,
) -> Result<Vec<LevelCodomain>, padic_limits::Error> {
    (1..=depth)
        .map(|k| LevelCodomain::from_manifold(n, k))
        .collect()
}
