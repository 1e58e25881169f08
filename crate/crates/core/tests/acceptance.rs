use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use gengap::builders::{augmentation_lattice, relation_lattice};
use gengap::cli::{execute, Request};
use gengap::formulas::{
    coprime_augmentation, coprime_relation, d_induced, mixed_augmentation, relation_normal_rank, FreeProductProblem, ModuleKind,
};
use gengap::gmodule::{brute_force_d, BruteForce, FpGModule, ZGLattice};
use gengap::groups::{natural_presentation, parse_factor_list, FactorSpec, FiniteGroup};
use gengap::synth::{build_nested_family, synthesize_generators, verify_certificate, Verdict};
use gengap::Error;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

type Outcome = Result<String, String>;

fn problem(s: &str, module: ModuleKind) -> FreeProductProblem {
    FreeProductProblem::new(parse_factor_list(s).unwrap(), module).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rows(report: &Value) -> BTreeMap<String, u64> {
    report["per_prime"]
        .as_array()
        .into_iter()
        .flatten()
        .map(|r| {
            let key = if r["generic"] == json!(true) { "good".to_string() } else { r["p"].to_string() };
            (key, r["sum"].as_u64().unwrap())
        })
        .collect()
}

fn relation_count_for_cyclic_times_z() -> Outcome {
    let start = Instant::now();
    let r = execute(&Request::new("relation").factors("C2xZ,C3xZ"), None);
    let r = serde_json::to_value(&r).unwrap();
    ensure(r["result"] == json!(3), || format!("count {}", r["result"]))?;
    let table = rows(&r);
    let want: BTreeMap<String, u64> = [("2".to_string(), 3), ("3".to_string(), 3), ("good".to_string(), 2)].into();
    ensure(table == want, || format!("table {table:?}"))?;
    let pr = problem("C2xZ,C3xZ", ModuleKind::Relation);
    let s = synthesize_generators(&pr).map_err(|e| e.to_string())?;
    ensure(s.certificate.generators.len() == 3, || format!("{} generators", s.certificate.generators.len()))?;
    let depth = match verify_certificate(&s.certificate, &pr, 6).map_err(|e| e.to_string())? {
        Verdict::Verified { depth, .. } => depth,
        v => return Err(format!("{v:?}")),
    };
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 10.0, || format!("{secs:.1}s"))?;
    Ok(format!("count 3, table {table:?}, 3 generators verified at depth {depth}, {secs:.2}s"))
}

fn elementary_abelian_relation_counts() -> Outcome {
    let mut seen = Vec::new();
    for (factors, want) in [("C2xC2,C3xC3", 5usize), ("C2xC2,C3xC3,C5xC5", 7)] {
        let pr = problem(factors, ModuleKind::Relation);
        let closed = coprime_relation(&pr).map_err(|e| e.to_string())?.result;
        let table = d_induced(&pr).map_err(|e| e.to_string())?.result;
        let n = pr.len();
        ensure(closed == want && table == want && want == 2 * n + 1, || format!("{factors}: closed {closed}, table {table}"))?;
        seen.push(format!("n = {n} -> {want}"));
    }
    Ok(seen.join(", "))
}

/// d_G(ΔG) and adef for the natural presentation, for the corpus components.
fn component_values(name: &str) -> (usize, i64) {
    match name {
        "C2" | "C3" | "C5" => (1, 0),
        // Elementary abelian of rank 2: ΔG/p needs 2 generators; the relation module needs 3 against a free group of rank 2.
        "C2xC2" | "C3xC3" => (2, 1),
        _ => unreachable!(),
    }
}

fn order_of(name: &str) -> u64 {
    name.split('x').map(|c| c[1..].parse::<u64>().unwrap()).product()
}

fn coprime_tuples() -> Vec<Vec<&'static str>> {
    let pool = ["C2", "C3", "C5", "C2xC2", "C3xC3"];
    let coprime = |a: &str, b: &str| num_integer::gcd(order_of(a), order_of(b)) == 1;
    let mut out = Vec::new();
    for i in 0..pool.len() {
        for j in i + 1..pool.len() {
            if !coprime(pool[i], pool[j]) {
                continue;
            }
            out.push(vec![pool[i], pool[j]]);
            for k in j + 1..pool.len() {
                if coprime(pool[i], pool[k]) && coprime(pool[j], pool[k]) {
                    out.push(vec![pool[i], pool[j], pool[k]]);
                }
            }
        }
    }
    out
}

fn finite_group_routes() -> Outcome {
    let tuples = coprime_tuples();
    for t in &tuples {
        let s = t.join(",");
        let n = t.len();
        let want_aug = t.iter().map(|c| component_values(c).0).max().unwrap() + n - 1;
        let want_adef = t.iter().map(|c| component_values(c).1).max().unwrap();
        let aug = problem(&s, ModuleKind::Augmentation);
        let closed = coprime_augmentation(&aug).map_err(|e| e.to_string())?;
        let table = d_induced(&aug).map_err(|e| e.to_string())?;
        ensure(closed.result == want_aug && table.result == want_aug, || format!("{s}: augmentation {} / {} vs {want_aug}", closed.result, table.result))?;
        let rel = problem(&s, ModuleKind::Relation);
        let closed = coprime_relation(&rel).map_err(|e| e.to_string())?;
        let table = d_induced(&rel).map_err(|e| e.to_string())?;
        let d_free: usize = rel.factors.iter().map(|f| f.min_generators_group().unwrap()).sum();
        let table_adef = table.result as i64 - d_free as i64;
        ensure(closed.adef == Some(want_adef) && table_adef == want_adef && closed.result == table.result, || {
            format!("{s}: adef {:?} / {table_adef} vs {want_adef}", closed.adef)
        })?;
    }
    Ok(format!("{} coprime pairs and triples agree on both routes", tuples.len()))
}

/// Whether every factor but one is torsion free or finite cyclic.
fn italic_criterion(factors: &[FactorSpec]) -> bool {
    let special = |f: &FactorSpec| {
        let g = f.finite_part();
        let cyclic = g.abelian_invariants().is_some_and(|inv| inv.len() <= 1);
        g.order() == 1 || (f.free_rank() == 0 && cyclic)
    };
    factors.iter().filter(|f| !special(f)).count() <= 1
}

/// d_H(ΔH) and the gap from the torsion and free ranks of each abelian factor.
fn abelian_oracle(factors: &[FactorSpec]) -> (usize, usize) {
    let parts: Vec<(usize, usize)> = factors.iter().map(|f| (f.finite_part().min_generators().unwrap(), f.free_rank())).collect();
    let delta = |a: usize| usize::from(a == 0);
    let n = parts.len();
    let d = (0..n)
        .map(|k| parts[k].0 + parts[k].1 + (0..n).filter(|&i| i != k).map(|i| parts[i].1 + delta(parts[i].1)).sum::<usize>())
        .max()
        .unwrap();
    let gap = (0..n)
        .map(|k| (0..n).filter(|&i| i != k).map(|i| parts[i].0 as i64 - delta(parts[i].1) as i64).sum::<i64>())
        .min()
        .unwrap();
    (d, usize::try_from(gap).expect("non-negative gap"))
}

fn infinite_gap_table() -> Outcome {
    for (s, d, gap) in [("C2xZ,C3xZ", 3, 1), ("C2xZ,C3", 3, 0)] {
        let r = mixed_augmentation(&problem(s, ModuleKind::Augmentation)).map_err(|e| e.to_string())?;
        ensure(r.result == d && r.gap == Some(gap), || format!("{s}: d {} gap {:?}", r.result, r.gap))?;
    }
    let corpus = [
        "C2xZ,C3xZ",
        "C2xZ,C3",
        "C2xC2,C3",
        "C2xC2,C3xC3",
        "Z,C2xC2",
        "ZxZ,C2xZ",
        "C6,C35",
        "C2xC2xZ,C3xC3",
        "C4xC2,C3,C5",
        "C2xZ,C3xZ,C5xZ",
        "Z,ZxZ,C3xC3",
        "C3xC3xZ,C2xZ,C5",
    ];
    let mut zero = 0;
    for s in corpus {
        let r = execute(&Request::new("gap").factors(s), None);
        ensure(r.exit_code == 0, || format!("{s}: {:?}", r.error))?;
        let factors = parse_factor_list(s).unwrap();
        let (d, gap) = abelian_oracle(&factors);
        let got = r.result.as_u64().unwrap() as usize;
        ensure(got == gap && r.details["d_module"] == json!(d), || format!("{s}: gap {got} d {} vs {gap}, {d}", r.details["d_module"]))?;
        ensure((gap == 0) == italic_criterion(&factors), || format!("{s}: gap {gap} disagrees with the criterion"))?;
        zero += usize::from(gap == 0);
    }
    Ok(format!("desk table exact; {} instances, {zero} with gap zero, all matching the criterion", corpus.len()))
}

fn oracle_groups() -> Vec<Arc<FiniteGroup>> {
    let mut out: Vec<FiniteGroup> = (2..=12).map(|n| FiniteGroup::cyclic(n).unwrap()).collect();
    for inv in [vec![2, 2], vec![2, 4], vec![2, 2, 2], vec![3, 3], vec![2, 6]] {
        out.push(FiniteGroup::abelian(&inv).unwrap());
    }
    for n in [3, 4, 5, 6] {
        out.push(FiniteGroup::dihedral(n).unwrap());
    }
    out.push(FiniteGroup::quaternion8().unwrap());
    out.push(FiniteGroup::dicyclic(3).unwrap());
    out.push(FiniteGroup::alternating4().unwrap());
    out.into_iter().map(Arc::new).collect()
}

const ORACLE_LIMIT: u128 = 729;

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for g in oracle_groups() {
        let delta = augmentation_lattice(&g).map_err(|e| e.to_string())?;
        let rel: ZGLattice = relation_lattice(&natural_presentation(g.clone()).unwrap()).map_err(|e| e.to_string())?.lattice;
        for p in [2u64, 3, 5, 7] {
            let mut modules: Vec<(&str, FpGModule)> = vec![("regular", FpGModule::regular(g.clone(), p).unwrap())];
            modules.push(("augmentation", delta.reduce_mod(p).unwrap()));
            modules.push(("relation", rel.reduce_mod(p).unwrap()));
            for (kind, m) in modules {
                if (p as u128).checked_pow(m.dim() as u32).is_none_or(|s| s > ORACLE_LIMIT) {
                    continue;
                }
                let radical = m.min_generators().map_err(|e| e.to_string())?;
                let brute = brute_force_d(&m, u128::MAX).map_err(|e| e.to_string())?;
                ensure(brute == BruteForce::Value(radical), || format!("{} {kind} mod {p}: radical {radical}, brute {brute:?}", g.name()))?;
                checked += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("{secs:.1}s"))?;
    Ok(format!("{checked} modules, zero mismatches, {secs:.2}s"))
}

fn first_primes_outside(excluded: &std::collections::BTreeSet<u64>, k: usize) -> Vec<u64> {
    (2u64..).filter(|&p| (2..p).all(|d| p % d != 0) && !excluded.contains(&p)).take(k).collect()
}

fn nested_family_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e65_7374);
    let groups: Vec<Arc<FiniteGroup>> = ["C2", "C3", "C4", "C5", "C6", "C2xC2", "S3", "D8", "Q8", "C2xC2xC2", "C3xC3", "A4"]
        .iter()
        .map(|s| Arc::new(gengap::groups::parse_finite_group(s).unwrap()))
        .collect();
    let extra = [2u64, 3, 5, 7, 11, 13];
    let mut lines = Vec::new();
    for i in 0..20 {
        let g = groups.choose(&mut rng).unwrap().clone();
        let relation = rng.gen_bool(0.5);
        let m = if relation {
            relation_lattice(&natural_presentation(g.clone()).unwrap()).unwrap().lattice
        } else {
            augmentation_lattice(&g).unwrap()
        };
        let mut pi: Vec<u64> = g.primes().into_iter().collect();
        let k = rng.gen_range(1..=3);
        for &p in extra.choose_multiple(&mut rng, k) {
            if !pi.contains(&p) {
                pi.push(p);
            }
        }
        pi.shuffle(&mut rng);
        let fam = build_nested_family(&m, &pi).map_err(|e| format!("instance {i}: {e}"))?;
        let table = fam.check(&m).map_err(|e| e.to_string())?;
        ensure(table.iter().all(|r| r.holds()), || format!("instance {i} ({}, {pi:?}): {table:?}", g.name()))?;
        ensure(fam.counts.windows(2).all(|w| w[0] >= w[1]), || format!("instance {i}: counts {:?}", fam.counts))?;
        let good = first_primes_outside(&g.primes(), 3);
        let counts: Vec<usize> = good.iter().map(|&p| m.reduce_mod(p).unwrap().min_generators().unwrap()).collect();
        ensure(counts.iter().all(|&c| c == counts[0]), || format!("instance {i}: good-prime counts {counts:?}"))?;
        let rational = m.d_rational().map_err(|e| e.to_string())?;
        for p in [2u64, 3, 5, 7, 11, 13] {
            let dp = m.reduce_mod(p).unwrap().min_generators().unwrap();
            ensure(rational <= dp, || format!("instance {i}: rational {rational} > d mod {p} = {dp}"))?;
        }
        lines.push(format!("{}{}", if relation { "R/" } else { "Δ" }, g.name()));
    }
    Ok(format!("20 instances hold: {}", lines.join(" ")))
}

fn identity_suite() -> Outcome {
    let r = execute(&Request::new("identity-check"), None);
    ensure(r.exit_code == 0, || format!("exit {}: {:?}", r.exit_code, r.hypotheses))?;
    let checks = r.hypotheses.as_array().cloned().unwrap_or_default();
    let names: Vec<String> = checks.iter().map(|c| c["name"].as_str().unwrap_or("").to_string()).collect();
    for needle in ["C2, x", "C3, x", "C6, x", "σ(τĜ(u))", "ψ_C", "S = zZH + 5S", "S = zZH + 7S", "exponent dividing n²"] {
        ensure(names.iter().any(|n| n.contains(needle)), || format!("missing identity {needle}"))?;
    }
    ensure(checks.iter().all(|c| c["holds"] == json!(true)), || "an identity failed".into())?;
    Ok(format!("{} exact identities hold", checks.len()))
}

fn bridson_arithmetic() -> Outcome {
    let mut req = Request::new("bridson");
    req.m = vec![2, 3];
    let r = execute(&req, None);
    ensure(r.result == json!(3) && r.details["q"] == json!(["8", "63"]), || format!("{:?} {:?}", r.result, r.details))?;
    req.m = vec![2, 4];
    let bad = execute(&req, None);
    ensure(bad.exit_code == 1 && bad.result.is_null(), || format!("(2, 4) accepted: {:?}", bad.result))?;
    Ok("q = (8, 63), coprime, result 3; (2, 4) rejected".into())
}

fn normal_rank_refused() -> Outcome {
    for s in ["C2xZ,C3xZ", "C2xC2,C3xC3", "C2,C3"] {
        let refused = matches!(relation_normal_rank(&problem(s, ModuleKind::Relation)), Err(Error::Unsupported(_)));
        ensure(refused, || format!("{s}: library emitted a value"))?;
        let mut req = Request::new("relation").factors(s);
        req.normal_generators = true;
        let r = execute(&req, None);
        ensure(r.exit_code == 1 && r.result.is_null() && r.provenance == "refused", || format!("{s}: {:?}", r.result))?;
    }
    Ok("normal generator counts refused by library and CLI".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("relation count for (C2xZ)*(C3xZ)", relation_count_for_cyclic_times_z),
        ("elementary abelian relation counts", elementary_abelian_relation_counts),
        ("finite coprime factors, both routes", finite_group_routes),
        ("augmentation gap table and criterion", infinite_gap_table),
        ("radical method against brute force", oracle_equivalence),
        ("nested families and prime independence", nested_family_invariants),
        ("exact identity suite", identity_suite),
        ("q-sequence arithmetic", bridson_arithmetic),
        ("normal generator count refused", normal_rank_refused),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(msg) => println!("criterion {}: PASS  {name}: {msg}", i + 1),
            Err(msg) => {
                println!("criterion {}: FAIL  {name}: {msg}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
