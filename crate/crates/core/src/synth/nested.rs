use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::builders::crt_combine;
use crate::error::{Error, Result};
use crate::exactla::primes::{is_prime, next_primes_outside, small_prime_divisors};
use crate::gmodule::{FpGModule, ZGLattice};

pub(crate) fn residues(v: &[BigInt], p: u64) -> Vec<u64> {
    let m = BigInt::from(p);
    v.iter().map(|x| x.mod_floor(&m).to_u64().expect("residue")).collect()
}

/// d_G(M/(pM + XℤG)).
pub fn residual_count(m: &ZGLattice, xs: &[Vec<BigInt>], p: u64) -> Result<usize> {
    let v = m.reduce_mod(p)?;
    residual_module(&v, xs).and_then(|q| q.min_generators())
}

fn residual_module(v: &FpGModule, xs: &[Vec<BigInt>]) -> Result<FpGModule> {
    let seeds: Vec<Vec<u64>> = xs.iter().map(|x| residues(x, v.p())).collect();
    v.quotient(&v.spin(&seeds)?)
}

/// Minimal generating sets modulo each prime of π, CRT-combined into one chain.
#[derive(Clone, Debug, Serialize)]
pub struct NestedFamily {
    /// Primes ordered by non-increasing count.
    pub primes: Vec<u64>,
    pub counts: Vec<usize>,
    /// x_1, …, x_d with d the largest count; the set for `primes[i]` is the prefix of length `counts[i]`.
    #[serde(serialize_with = "crate::synth::ser_vectors")]
    pub elements: Vec<Vec<BigInt>>,
}

impl NestedFamily {
    pub fn set(&self, i: usize) -> &[Vec<BigInt>] {
        &self.elements[..self.counts[i]]
    }

    pub fn minimal(&self) -> &[Vec<BigInt>] {
        self.set(self.primes.len() - 1)
    }

    /// Checks minimal generation modulo each prime and d(M/(pM + X_min ℤG)) = d_p − d_min.
    pub fn check(&self, m: &ZGLattice) -> Result<Vec<EnestRow>> {
        let dmin = *self.counts.last().expect("nonempty");
        let mut rows = Vec::with_capacity(self.primes.len());
        for (i, &p) in self.primes.iter().enumerate() {
            let v = m.reduce_mod(p)?;
            let seeds: Vec<Vec<u64>> = self.set(i).iter().map(|x| residues(x, p)).collect();
            let generates = v.generates(&seeds)?;
            let minimal = v.min_generators()? == self.counts[i];
            let residual = residual_module(&v, self.minimal())?.min_generators()?;
            rows.push(EnestRow { p, count: self.counts[i], generates, minimal, residual, expected: self.counts[i] - dmin });
        }
        Ok(rows)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EnestRow {
    pub p: u64,
    pub count: usize,
    pub generates: bool,
    pub minimal: bool,
    pub residual: usize,
    pub expected: usize,
}

impl EnestRow {
    pub fn holds(&self) -> bool {
        self.generates && self.minimal && self.residual == self.expected
    }
}

pub fn build_nested_family(m: &ZGLattice, pi: &[u64]) -> Result<NestedFamily> {
    let distinct: BTreeSet<u64> = pi.iter().copied().collect();
    if distinct.is_empty() {
        return Err(Error::Hypothesis("prime set must be nonempty".into()));
    }
    if distinct.len() != pi.len() {
        return Err(Error::Hypothesis(format!("repeated primes in {pi:?}")));
    }
    if let Some(&p) = distinct.iter().find(|&&p| !is_prime(p)) {
        return Err(Error::InvalidModulus(p));
    }
    let mut sets = Vec::with_capacity(pi.len());
    for &p in &distinct {
        sets.push((p, m.reduce_mod(p)?.minimal_generating_set()?));
    }
    sets.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(&b.0)));
    let size = sets[0].1.len();
    let elements = crt_combine(&sets, size, m.rank());
    Ok(NestedFamily { primes: sets.iter().map(|s| s.0).collect(), counts: sets.iter().map(|s| s.1.len()).collect(), elements })
}

/// Evidence for (g1) and (g2) on one tested prime set.
#[derive(Clone, Debug, Serialize)]
pub struct GoodModuleWitness {
    pub claimed: BTreeSet<u64>,
    pub delta: usize,
    /// d at primes of the claimed set.
    pub claimed_counts: Vec<(u64, usize)>,
    /// d at three primes outside the claimed set.
    pub generic_counts: Vec<(u64, usize)>,
    pub tested: BTreeSet<u64>,
    pub family: NestedFamily,
    /// The minimal element X actually used, possibly re-chosen modulo Π(tested).
    #[serde(serialize_with = "crate::synth::ser_vectors")]
    pub x: Vec<Vec<BigInt>>,
    #[serde(serialize_with = "crate::synth::ser_big")]
    pub exponent: BigInt,
    /// d(M/(pM + XℤG)) for primes outside the tested set.
    pub outside_counts: Vec<(u64, usize)>,
    pub rechoices: usize,
}

const RECHOICE_BUDGET: usize = 400;
/// Candidates compared for the smallest quotient exponent before settling.
const RECHOICE_POOL: usize = 8;

pub fn check_good(m: &ZGLattice, claimed: &BTreeSet<u64>, tested: &BTreeSet<u64>) -> Result<GoodModuleWitness> {
    good_witness(m, claimed, tested, &BTreeSet::new())
}

/// As [`check_good`], additionally requiring X to generate M modulo every prime of `generate_at`.
pub(crate) fn good_witness(m: &ZGLattice, claimed: &BTreeSet<u64>, tested: &BTreeSet<u64>, generate_at: &BTreeSet<u64>) -> Result<GoodModuleWitness> {
    if !(claimed.is_subset(tested) && claimed.len() < tested.len()) {
        return Err(Error::Hypothesis(format!("tested primes {tested:?} must strictly contain {claimed:?}")));
    }
    let generic_primes = next_primes_outside(claimed, 3);
    let generic_counts: Vec<(u64, usize)> =
        generic_primes.iter().map(|&p| Ok((p, m.reduce_mod(p)?.min_generators()?))).collect::<Result<_>>()?;
    let delta = generic_counts[0].1;
    if let Some(&(p, d)) = generic_counts.iter().find(|(_, d)| *d != delta) {
        return Err(Error::Internal(format!("(g1) fails: d = {d} at {p} but {delta} at {}", generic_counts[0].0)));
    }
    let claimed_counts: Vec<(u64, usize)> =
        claimed.iter().map(|&p| Ok((p, m.reduce_mod(p)?.min_generators()?))).collect::<Result<_>>()?;
    if let Some(&(p, d)) = claimed_counts.iter().find(|(_, d)| *d < delta) {
        return Err(Error::Internal(format!("(g1) fails: d = {d} at {p} is below the generic value {delta}")));
    }
    let primes: Vec<u64> = tested.iter().copied().collect();
    let family = build_nested_family(m, &primes)?;
    if family.minimal().len() != delta {
        return Err(Error::Internal(format!("minimal set has {} elements, expected {delta}", family.minimal().len())));
    }
    let modulus: BigInt = primes.iter().map(|&p| BigInt::from(p)).product();
    let half = &modulus / 2;
    let base: Vec<Vec<BigInt>> = family
        .minimal()
        .iter()
        .map(|x| {
            x.iter()
                .map(|e| {
                    let r = e.mod_floor(&modulus);
                    if r > half {
                        r - &modulus
                    } else {
                        r
                    }
                })
                .collect()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut best: Option<(BigInt, Vec<(u64, usize)>, Vec<Vec<BigInt>>, usize)> = None;
    for attempt in 0..=RECHOICE_BUDGET {
        if best.is_some() && attempt >= RECHOICE_POOL {
            break;
        }
        let mut x = base.clone();
        if attempt > 0 {
            for e in x.iter_mut().flatten() {
                *e += &modulus * BigInt::from(rng.gen_range(-1i64..=1));
            }
        }
        if let Some((exponent, outside)) = outside_evidence(m, &x, tested, generate_at)? {
            if best.as_ref().is_none_or(|b| exponent < b.0) {
                best = Some((exponent, outside, x, attempt));
            }
        }
    }
    let (exponent, outside_counts, x, rechoices) =
        best.ok_or_else(|| Error::Budget(format!("no re-choice of the minimal set passed (g2) within {RECHOICE_BUDGET} attempts")))?;
    let mut all_tested = tested.clone();
    all_tested.extend(generate_at);
    Ok(GoodModuleWitness {
        claimed: claimed.clone(),
        delta,
        claimed_counts,
        generic_counts,
        tested: all_tested,
        family,
        x,
        exponent,
        outside_counts,
        rechoices,
    })
}

/// Exponent of M/XℤG and the residual counts outside `tested`, if (g2) holds for X
/// and X generates modulo each prime of `generate_at`.
fn outside_evidence(
    m: &ZGLattice,
    x: &[Vec<BigInt>],
    tested: &BTreeSet<u64>,
    generate_at: &BTreeSet<u64>,
) -> Result<Option<(BigInt, Vec<(u64, usize)>)>> {
    let Some(exponent) = m.quotient_structure(x)?.exponent() else { return Ok(None) };
    let Some(mut sample) = small_prime_divisors(&exponent) else { return Ok(None) };
    if sample.iter().any(|p| generate_at.contains(p)) {
        return Ok(None);
    }
    sample.retain(|p| !tested.contains(p));
    let mut excluded = tested.clone();
    excluded.extend(&sample);
    excluded.extend(generate_at);
    sample.extend(next_primes_outside(&excluded, 2));
    let mut counts = Vec::with_capacity(sample.len());
    for p in sample {
        let d = residual_count(m, x, p)?;
        if d > 1 {
            return Ok(None);
        }
        counts.push((p, d));
    }
    Ok(Some((exponent, counts)))
}
