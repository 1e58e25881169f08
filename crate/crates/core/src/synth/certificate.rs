use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::builders::swan_witness;
use crate::error::{Error, Result};
use crate::exactla::primes::{inv_mod, prime_divisors, small_prime_divisors};
use crate::formulas::{bergman_mod_p, d_induced, Component, FreeProductProblem};
use crate::gmodule::ZGLattice;

use super::induced::{FreeProduct, InducedElement, Key, LocalAction, NormalWord};
use super::local::{coprime_part, infinite_factor_generators, laurent_ring, lattice_ring, solve_lattice, InfiniteGenerators, InfiniteKind};
use super::nested::{good_witness, residues};

pub const DEFAULT_DEPTH_CAP: usize = 8;
/// Upper bound on |X|·|ball| for one spinning round.
const SPIN_LIMIT: usize = 60_000;
const SWAN_BUDGET: usize = 4000;

enum Summand {
    Lattice { lattice: ZGLattice, claimed: BTreeSet<u64> },
    Infinite(Box<InfiniteGenerators>),
}

struct Setup {
    fp: FreeProduct,
    actions: Vec<LocalAction>,
    summands: Vec<Summand>,
    components: Vec<Component>,
}

fn setup(problem: &FreeProductProblem) -> Result<Setup> {
    let components = problem.components()?;
    let mut summands = Vec::with_capacity(components.len());
    for (i, comp) in components.iter().enumerate() {
        let s = match comp {
            Component::Finite { lattice } => Summand::Lattice { claimed: lattice.group().primes(), lattice: lattice.clone() },
            Component::CyclicRelation { .. } => {
                Summand::Infinite(Box::new(infinite_factor_generators(&problem.factors[i], InfiniteKind::Relation)?))
            }
            Component::NilpotentAugmentation { .. } => {
                Summand::Infinite(Box::new(infinite_factor_generators(&problem.factors[i], InfiniteKind::Augmentation)?))
            }
        };
        summands.push(s);
    }
    let groups = summands
        .iter()
        .map(|s| match s {
            Summand::Lattice { lattice, .. } => lattice.group().clone(),
            Summand::Infinite(g) => g.cz.group().clone(),
        })
        .collect();
    let infinite = summands.iter().map(|s| matches!(s, Summand::Infinite(_))).collect();
    let actions = summands
        .iter()
        .map(|s| match s {
            Summand::Lattice { lattice, .. } => LocalAction::lattice(lattice),
            Summand::Infinite(_) => LocalAction::Free,
        })
        .collect();
    Ok(Setup { fp: FreeProduct::new(groups, infinite), actions, summands, components })
}

fn canonical(setup: &Setup) -> Vec<(usize, InducedElement)> {
    let mut out = Vec::new();
    for (i, s) in setup.summands.iter().enumerate() {
        match s {
            Summand::Lattice { lattice, .. } => {
                for b in 0..lattice.rank() {
                    let mut e = vec![BigInt::zero(); lattice.rank()];
                    e[b] = BigInt::one();
                    out.push((i, InducedElement::from_lattice(i, &e)));
                }
            }
            Summand::Infinite(g) => out.extend(g.canonical.iter().map(|v| (i, InducedElement::from_free(i, v)))),
        }
    }
    out
}

/// Canonical ℤG-generators of M: a ℤ-basis of each finite-factor lattice and the
/// canonical ℤH_i-generators of each infinite-factor module, all at the trivial coset.
pub fn canonical_generators(problem: &FreeProductProblem) -> Result<Vec<InducedElement>> {
    Ok(canonical(&setup(problem)?).into_iter().map(|(_, v)| v).collect())
}

/// m·v = Σ coefficient · X[index] · word, for one canonical generator v.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Membership {
    pub generator: usize,
    pub terms: Vec<(usize, String, NormalWord)>,
}

impl Membership {
    fn depth(&self) -> usize {
        self.terms.iter().map(|(_, _, w)| FreeProduct::length(w)).max().unwrap_or(0)
    }
}

/// One p-element of the finite part A: which summand, prime, chain step and slot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UPart {
    pub summand: usize,
    pub p: u64,
    /// 0 for primes outside the tested set, k ≥ 1 for the k-th step of the chain inside it.
    pub step: usize,
    pub slot: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationCertificate {
    pub problem: String,
    pub claimed: usize,
    /// Per summand, the size of its own generating block X_i.
    pub block_sizes: Vec<usize>,
    pub tested_primes: Vec<u64>,
    pub generators: Vec<InducedElement>,
    /// Decimal exponent bound m of M/XℤG.
    pub exponent: String,
    pub exponent_proofs: Vec<Membership>,
    /// Spin depth L_p found for each p | m.
    pub spin_depths: BTreeMap<u64, usize>,
    pub a_parts: Vec<UPart>,
    pub provenance: String,
    /// n·ρ − x̄ⁿ·c for each relation summand C_n × ℤ, for comparison with the z used.
    pub literal_z: Vec<InducedElement>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Verdict {
    Verified { depth: usize, spin_depths: BTreeMap<u64, usize> },
    Incomplete { reason: String },
    Refuted { reason: String },
}

impl Verdict {
    pub fn is_verified(&self) -> bool {
        matches!(self, Verdict::Verified { .. })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Synthesis {
    pub certificate: GenerationCertificate,
    pub verdict: Verdict,
}

fn membership(generator: usize, parts: Vec<(usize, Vec<(BigInt, NormalWord)>)>) -> Membership {
    let mut terms = Vec::new();
    for (idx, ring) in parts {
        for (c, w) in ring {
            if !c.is_zero() {
                terms.push((idx, c.to_string(), w));
            }
        }
    }
    Membership { generator, terms }
}

fn hypothesis_gate(problem: &FreeProductProblem) -> Result<usize> {
    let report = d_induced(problem)?;
    if let Some(h) = report.hypotheses.iter().find(|h| !h.holds) {
        return Err(Error::Hypothesis(format!("{}: {}", h.name, h.detail)));
    }
    Ok(report.result)
}

/// Builds X with |X| = max_p Σ_i d(M_i/pM_i) and verifies it.
pub fn synthesize_generators(problem: &FreeProductProblem) -> Result<Synthesis> {
    let delta = hypothesis_gate(problem)?;
    let st = setup(problem)?;
    let (_, good) = problem.prime_support();
    let e: Vec<usize> = st.components.iter().map(|c| c.value_at(good)).collect::<Result<_>>()?;
    let sum_e: usize = e.iter().sum();
    let canon = canonical(&st);
    let literal_z = st
        .summands
        .iter()
        .enumerate()
        .filter_map(|(i, s)| match s {
            Summand::Infinite(g) => g.literal_z.as_ref().map(|z| InducedElement::from_free(i, z)),
            _ => None,
        })
        .collect();

    let certificate = if delta == sum_e {
        swan_case(problem, &st, &canon, &e, delta, literal_z)?
    } else {
        assembled_case(problem, &st, &canon, &e, delta, good, literal_z)?
    };
    let verdict = verify_certificate(&certificate, problem, DEFAULT_DEPTH_CAP)?;
    let mut certificate = certificate;
    if let Verdict::Verified { spin_depths, .. } = &verdict {
        certificate.spin_depths = spin_depths.clone();
    }
    Ok(Synthesis { certificate, verdict })
}

/// Every module has constant counts: X is the union of Swan witnesses.
fn swan_case(
    problem: &FreeProductProblem,
    st: &Setup,
    canon: &[(usize, InducedElement)],
    e: &[usize],
    delta: usize,
    literal_z: Vec<InducedElement>,
) -> Result<GenerationCertificate> {
    let mut blocks: Vec<Vec<Vec<BigInt>>> = Vec::new();
    for (i, s) in st.summands.iter().enumerate() {
        let Summand::Lattice { lattice, .. } = s else {
            return Err(Error::Internal(format!("summand {i} has non-constant counts but the table says otherwise")));
        };
        let w = swan_witness(lattice, &[], SWAN_BUDGET)?
            .ok_or_else(|| Error::Budget(format!("no Swan witness found for summand {i} within {SWAN_BUDGET} candidates")))?;
        if w.generators.len() != e[i] {
            return Err(Error::Internal(format!("Swan witness of size {} for summand {i}, expected {}", w.generators.len(), e[i])));
        }
        blocks.push(w.generators);
    }
    let offsets = offsets(&blocks);
    let mut generators = Vec::new();
    for (i, b) in blocks.iter().enumerate() {
        generators.extend(b.iter().map(|x| InducedElement::from_lattice(i, x)));
    }
    let mut proofs = Vec::new();
    for (k, (i, v)) in canon.iter().enumerate() {
        let Summand::Lattice { lattice, .. } = &st.summands[*i] else { unreachable!() };
        let target = lattice_vector(v, lattice.rank());
        let sol = solve_lattice(lattice, &blocks[*i], &target)
            .ok_or_else(|| Error::Internal(format!("Swan witness of summand {i} does not reach basis vector {k}")))?;
        proofs.push(membership(k, sol.iter().enumerate().map(|(j, r)| (offsets[*i] + j, lattice_ring(*i, r))).collect()));
    }
    Ok(GenerationCertificate {
        problem: problem.to_string(),
        claimed: delta,
        block_sizes: e.to_vec(),
        tested_primes: vec![],
        generators,
        exponent: "1".into(),
        exponent_proofs: proofs,
        spin_depths: BTreeMap::new(),
        a_parts: vec![],
        provenance: "union of Swan witnesses".into(),
        literal_z,
    })
}

fn offsets<T>(blocks: &[Vec<T>]) -> Vec<usize> {
    blocks
        .iter()
        .scan(0, |acc, b| {
            let o = *acc;
            *acc += b.len();
            Some(o)
        })
        .collect()
}

fn lattice_vector(v: &InducedElement, rank: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); rank];
    for (k, x) in &v.terms {
        out[k.slot] = x.clone();
    }
    out
}

/// Local data for one summand in the assembled case.
struct Block {
    x: Vec<InducedElement>,
    exponent: BigInt,
    /// (p, lifted p-elements) for p ∈ π(N_i).
    parts: Vec<(u64, Vec<InducedElement>)>,
}

fn assembled_case(
    problem: &FreeProductProblem,
    st: &Setup,
    canon: &[(usize, InducedElement)],
    e: &[usize],
    delta: usize,
    good: u64,
    literal_z: Vec<InducedElement>,
) -> Result<GenerationCertificate> {
    let s = delta - e.iter().sum::<usize>();
    let mut pi: BTreeSet<u64> = BTreeSet::new();
    for sm in &st.summands {
        match sm {
            Summand::Lattice { claimed, .. } => pi.extend(claimed),
            Summand::Infinite(g) => pi.extend(prime_divisors(g.cz.n())),
        }
    }
    pi.insert(good);
    let mut extra: BTreeSet<u64> = BTreeSet::new();
    let mut blocks = Vec::with_capacity(st.summands.len());
    let mut lattice_x: Vec<Vec<Vec<BigInt>>> = Vec::new();
    for (i, sm) in st.summands.iter().enumerate() {
        let block = match sm {
            Summand::Lattice { lattice, claimed } => {
                let w = good_witness(lattice, claimed, &pi, &extra)?;
                if w.x.len() != e[i] {
                    return Err(Error::Internal(format!("summand {i}: minimal set has {} elements, generic count {}", w.x.len(), e[i])));
                }
                let parts = lattice_parts(i, lattice, &w.x, &w.exponent)?;
                lattice_x.push(w.x.clone());
                Block { x: w.x.iter().map(|x| InducedElement::from_lattice(i, x)).collect(), exponent: w.exponent.clone(), parts }
            }
            Summand::Infinite(g) => {
                lattice_x.push(vec![]);
                let mut parts = Vec::new();
                for p in prime_divisors(g.exponent) {
                    let u = g.cyclic_generator.scale(&BigInt::from(coprime_part(g.exponent, p)));
                    parts.push((p, vec![InducedElement::from_free(i, &u)]));
                }
                Block { x: vec![InducedElement::from_free(i, &g.x)], exponent: BigInt::from(g.exponent), parts }
            }
        };
        let primes = small_prime_divisors(&block.exponent).ok_or_else(|| Error::Budget(format!("cannot factor exponent {}", block.exponent)))?;
        extra.extend(primes.into_iter().filter(|p| !pi.contains(p)));
        blocks.push(block);
    }

    // Distribute the p-elements over s slots, prime by prime.
    let mut by_prime: BTreeMap<u64, Vec<(usize, usize, &InducedElement)>> = BTreeMap::new();
    for (i, b) in blocks.iter().enumerate() {
        for (p, us) in &b.parts {
            let inside = pi.contains(p);
            let expected = st.components[i].value_at(*p)? - e[i];
            if inside && us.len() != expected {
                return Err(Error::Internal(format!("summand {i}: {} residual generators at {p}, expected {expected}", us.len())));
            }
            if !inside && us.len() > 1 {
                return Err(Error::Internal(format!("summand {i}: quotient not cyclic at {p} outside the tested primes")));
            }
            for (k, u) in us.iter().enumerate() {
                by_prime.entry(*p).or_default().push((i, if inside { k + 1 } else { 0 }, u));
            }
        }
    }
    let mut slots = vec![InducedElement::zero(); s];
    let mut a_parts = Vec::new();
    for (p, us) in &by_prime {
        if us.len() > s {
            return Err(Error::Internal(format!("{} p-elements at {p} exceed the {s} available slots", us.len())));
        }
        if !pi.contains(p) && us.len() > 1 {
            return Err(Error::Internal(format!("two summands are non-cyclic at the outside prime {p}")));
        }
        for (slot, (i, step, u)) in us.iter().enumerate() {
            slots[slot].add_scaled(u, &BigInt::one());
            a_parts.push(UPart { summand: *i, p: *p, step: *step, slot });
        }
    }

    let m = blocks.iter().fold(BigInt::one(), |acc, b| acc.lcm(&b.exponent));
    let block_x: Vec<Vec<InducedElement>> = blocks.iter().map(|b| b.x.clone()).collect();
    let offsets = offsets(&block_x);
    let mut generators: Vec<InducedElement> = block_x.into_iter().flatten().collect();
    generators.extend(slots);

    let mut proofs = Vec::new();
    for (k, (i, v)) in canon.iter().enumerate() {
        match &st.summands[*i] {
            Summand::Lattice { lattice, .. } => {
                let target: Vec<BigInt> = lattice_vector(v, lattice.rank()).iter().map(|x| x * &m).collect();
                let sol = solve_lattice(lattice, &lattice_x[*i], &target)
                    .ok_or_else(|| Error::Internal(format!("exponent {m} does not kill generator {k} modulo X_{i}")))?;
                proofs.push(membership(k, sol.iter().enumerate().map(|(j, r)| (offsets[*i] + j, lattice_ring(*i, r))).collect()));
            }
            Summand::Infinite(g) => {
                let local = k - canon.iter().position(|(j, _)| j == i).expect("present");
                let r = g.exponent_witnesses[local].scale(&(&m / BigInt::from(g.exponent)));
                proofs.push(membership(k, vec![(offsets[*i], laurent_ring(*i, &r))]));
            }
        }
    }
    Ok(GenerationCertificate {
        problem: problem.to_string(),
        claimed: delta,
        block_sizes: e.to_vec(),
        tested_primes: pi.into_iter().collect(),
        generators,
        exponent: m.to_string(),
        exponent_proofs: proofs,
        spin_depths: BTreeMap::new(),
        a_parts,
        provenance: "good-module blocks plus CRT-assembled finite part".into(),
        literal_z,
    })
}

/// For each p | exponent, p-element lifts minimally generating N/pN with N = M/XℤG.
fn lattice_parts(i: usize, lattice: &ZGLattice, x: &[Vec<BigInt>], exponent: &BigInt) -> Result<Vec<(u64, Vec<InducedElement>)>> {
    let mut out = Vec::new();
    let primes = small_prime_divisors(exponent).ok_or_else(|| Error::Budget(format!("cannot factor exponent {exponent}")))?;
    for p in primes {
        let v = lattice.reduce_mod(p)?;
        let seeds: Vec<Vec<u64>> = x.iter().map(|y| residues(y, p)).collect();
        let sub = v.spin(&seeds)?;
        let q = v.quotient(&sub)?;
        let free: Vec<usize> = (0..v.dim()).filter(|c| !sub.pivots().contains(c)).collect();
        let scale = coprime_part_big(exponent, p);
        let mut us = Vec::new();
        for gen in q.minimal_generating_set()? {
            let mut lift = vec![BigInt::zero(); lattice.rank()];
            for (&c, &val) in free.iter().zip(&gen) {
                lift[c] = BigInt::from(val) * &scale;
            }
            us.push(InducedElement::from_lattice(i, &lift));
        }
        out.push((p, us));
    }
    Ok(out)
}

fn coprime_part_big(m: &BigInt, p: u64) -> BigInt {
    let p = BigInt::from(p);
    let mut m = m.clone();
    while (&m % &p).is_zero() {
        m /= &p;
    }
    m
}

fn check_shape(st: &Setup, x: &InducedElement) -> Result<()> {
    let bad = |msg: String| Error::Schema { field: "generators".into(), message: msg };
    for key in x.terms.keys() {
        let Key { summand, slot, g, c, tail } = key;
        if *summand >= st.summands.len() {
            return Err(bad(format!("summand {summand} out of range")));
        }
        match &st.summands[*summand] {
            Summand::Lattice { lattice, .. } => {
                if *slot >= lattice.rank() || *g != 0 || *c != 0 {
                    return Err(bad(format!("invalid lattice coordinate {key:?}")));
                }
            }
            Summand::Infinite(gen) => {
                if *slot >= gen.slots() || *g >= gen.cz.group().order() {
                    return Err(bad(format!("invalid Laurent coordinate {key:?}")));
                }
            }
        }
        st.fp.check_word(tail)?;
        if tail.first().is_some_and(|s| s.factor == *summand) {
            return Err(bad(format!("coset word of {key:?} starts in its own factor")));
        }
    }
    Ok(())
}

/// Checks (i) the exponent proofs exactly and (ii) mod-p spinning for p | m, with
/// word lengths up to `depth_cap`.
pub fn verify_certificate(cert: &GenerationCertificate, problem: &FreeProductProblem, depth_cap: usize) -> Result<Verdict> {
    let st = setup(problem)?;
    for x in &cert.generators {
        check_shape(&st, x)?;
    }
    let (support, good) = problem.prime_support();
    for p in support.iter().copied().chain([good]) {
        let row = bergman_mod_p(problem, p)?;
        if cert.generators.len() < row.sum {
            return Ok(Verdict::Refuted {
                reason: format!("{} elements cannot generate: d(M/{p}M) = {} by additivity over the factors", cert.generators.len(), row.sum),
            });
        }
    }
    if depth_cap == 0 {
        return Ok(Verdict::Incomplete { reason: "depth cap 0 allows no spinning".into() });
    }
    let canon = canonical(&st);
    let m: BigInt = cert
        .exponent
        .parse()
        .map_err(|_| Error::Schema { field: "exponent".into(), message: format!("`{}` is not an integer", cert.exponent) })?;
    if m < BigInt::one() {
        return Err(Error::Schema { field: "exponent".into(), message: "must be positive".into() });
    }
    let covered: BTreeSet<usize> = cert.exponent_proofs.iter().map(|p| p.generator).collect();
    if covered.len() != canon.len() || covered.iter().any(|&k| k >= canon.len()) {
        return Err(Error::Schema { field: "exponent_proofs".into(), message: format!("expected one proof per canonical generator ({})", canon.len()) });
    }
    let mut depth = 0;
    for proof in &cert.exponent_proofs {
        let d = proof.depth();
        if d > depth_cap {
            return Ok(Verdict::Incomplete { reason: format!("exponent proof for generator {} needs words of length {d}", proof.generator) });
        }
        depth = depth.max(d);
        let mut sum = InducedElement::zero();
        for (idx, coeff, w) in &proof.terms {
            let x = cert.generators.get(*idx).ok_or_else(|| Error::Schema {
                field: "exponent_proofs".into(),
                message: format!("generator index {idx} out of range"),
            })?;
            st.fp.check_word(w)?;
            let c: BigInt = coeff.parse().map_err(|_| Error::Schema { field: "exponent_proofs".into(), message: format!("bad coefficient `{coeff}`") })?;
            sum.add_scaled(&x.act_word(&st.fp, &st.actions, w), &c);
        }
        if sum != canon[proof.generator].1.scale(&m) {
            return Ok(Verdict::Incomplete { reason: format!("exponent proof for generator {} does not evaluate to m·v", proof.generator) });
        }
    }
    let Some(spin_primes) = small_prime_divisors(&m) else {
        return Ok(Verdict::Incomplete { reason: format!("cannot factor the exponent bound {m}") });
    };
    let targets: Vec<InducedElement> = canon.into_iter().map(|(_, v)| v).collect();
    let mut spin_depths = BTreeMap::new();
    for p in spin_primes {
        match spin_depth(&st, &cert.generators, &targets, p, depth_cap)? {
            Some(l) => {
                depth = depth.max(l);
                spin_depths.insert(p, l);
            }
            None => {
                return Ok(Verdict::Incomplete { reason: format!("spinning modulo {p} did not reach every generator within length {depth_cap}") })
            }
        }
    }
    Ok(Verdict::Verified { depth, spin_depths })
}

/// Smallest L ≤ cap such that the 𝔽_p-span of {x·w : |w| ≤ L} contains every target modulo p.
fn spin_depth(st: &Setup, xs: &[InducedElement], targets: &[InducedElement], p: u64, cap: usize) -> Result<Option<usize>> {
    for l in 1..=cap {
        let ball = st.fp.ball(l);
        if ball.len() * xs.len().max(1) > SPIN_LIMIT {
            return Ok(None);
        }
        let mut index: BTreeMap<Key, usize> = BTreeMap::new();
        let mut ech = SparseEchelon::new(p);
        for x in xs {
            for w in &ball {
                let v = x.act_word(&st.fp, &st.actions, w);
                ech.insert(sparse(&v, &mut index, p));
            }
        }
        if targets.iter().all(|t| ech.contains(sparse(t, &mut index, p))) {
            return Ok(Some(l));
        }
    }
    Ok(None)
}

fn sparse(v: &InducedElement, index: &mut BTreeMap<Key, usize>, p: u64) -> BTreeMap<usize, u64> {
    let pb = BigInt::from(p);
    let mut out = BTreeMap::new();
    for (k, x) in &v.terms {
        let r = x.mod_floor(&pb).to_u64().expect("residue");
        if r != 0 {
            let n = index.len();
            let col = *index.entry(k.clone()).or_insert(n);
            out.insert(col, r);
        }
    }
    out
}

/// Row echelon form over 𝔽_p for sparse vectors, keyed by leading column.
struct SparseEchelon {
    p: u64,
    rows: BTreeMap<usize, BTreeMap<usize, u64>>,
}

impl SparseEchelon {
    fn new(p: u64) -> Self {
        SparseEchelon { p, rows: BTreeMap::new() }
    }

    fn reduce(&self, mut v: BTreeMap<usize, u64>) -> BTreeMap<usize, u64> {
        let p = self.p;
        let mut cursor = 0;
        while let Some((&col, &a)) = v.range(cursor..).find(|(c, _)| self.rows.contains_key(c)) {
            let row = &self.rows[&col];
            for (&c, &b) in row {
                let e = v.entry(c).or_insert(0);
                *e = (*e + p - a * b % p) % p;
                if *e == 0 {
                    v.remove(&c);
                }
            }
            cursor = col + 1;
        }
        v
    }

    fn insert(&mut self, v: BTreeMap<usize, u64>) {
        let mut v = self.reduce(v);
        let Some((&lead, &a)) = v.iter().next() else { return };
        let inv = inv_mod(a as i128, self.p as i128).expect("nonzero residue") as u64;
        for x in v.values_mut() {
            *x = *x * inv % self.p;
        }
        self.rows.insert(lead, v);
    }

    fn contains(&self, v: BTreeMap<usize, u64>) -> bool {
        self.reduce(v).is_empty()
    }
}
