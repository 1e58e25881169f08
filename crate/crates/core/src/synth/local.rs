use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactla::{integer_combination, solve_mod_p, FpMatrix};
use crate::gmodule::ZGLattice;
use crate::gring::{CyclicZ, LaurentElement, ModuleElement};
use crate::groups::{FactorSpec, FiniteGroup};

use super::induced::{NormalWord, Syllable};

/// Largest c-window tried by the Laurent membership solver.
pub const MAX_WINDOW: i64 = 8;

/// Which module an infinite factor C_n × ℤ carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InfiniteKind {
    Augmentation,
    Relation,
}

/// Explicit generators for the module of an infinite factor H = C_n × ℤ.
#[derive(Clone, Debug)]
pub struct InfiniteGenerators {
    pub kind: InfiniteKind,
    pub cz: CyclicZ,
    /// Canonical ℤH-generators of the module inside ℤH^k.
    pub canonical: Vec<ModuleElement>,
    /// X = {x + (c − 1)Ĝ} or {z}.
    pub x: ModuleElement,
    /// Element whose image generates M/XℤH.
    pub cyclic_generator: ModuleElement,
    /// Smallest m dividing |G|² with m·M ⊆ XℤH, from the membership oracle.
    pub exponent: u64,
    /// For each canonical generator v, r with exponent·v = x·r.
    pub exponent_witnesses: Vec<LaurentElement>,
    /// The element read literally as n·ρ − x̄ⁿ·c, for comparison with `x` (relation case).
    pub literal_z: Option<ModuleElement>,
}

impl InfiniteGenerators {
    pub fn slots(&self) -> usize {
        self.x.coords.len()
    }
}

/// (X, exponent bound) for C_n × ℤ, or the rank-one nilpotent product with cyclic finite part.
pub fn infinite_factor_generators(factor: &FactorSpec, kind: InfiniteKind) -> Result<InfiniteGenerators> {
    let n = match factor {
        FactorSpec::CyclicTimesZ { n } => *n,
        FactorSpec::NilpotentProduct { group, rank: 1 } if crate::formulas::is_cyclic(group) && group.order() > 1 => {
            group.order() as u64
        }
        _ => return Err(Error::Unsupported(format!("explicit generators for {factor}"))),
    };
    let cz = CyclicZ::new(n)?;
    let (canonical, x, w, literal) = match kind {
        InfiniteKind::Relation => (vec![cz.r1(), cz.r2()], cz.z(), cz.rho(), Some(cz.literal_z())),
        InfiniteKind::Augmentation => {
            let am1 = cz.a_minus_1();
            let cm1 = cz.c(1).sub(&cz.one())?;
            let x = am1.add(&cm1.mul(&cz.ghat())?)?;
            (vec![ModuleElement::new(vec![am1]), ModuleElement::new(vec![cm1.clone()])], ModuleElement::new(vec![x]), ModuleElement::new(vec![cm1]), None)
        }
    };
    let bound = n * n;
    let mut found = None;
    for m in (1..=bound).filter(|m| bound % m == 0) {
        let targets: Vec<ModuleElement> = canonical.iter().map(|v| v.scale(&BigInt::from(m))).collect();
        let sols: Option<Vec<LaurentElement>> =
            targets.iter().map(|t| solve_laurent(cz.group(), std::slice::from_ref(&x), t, MAX_WINDOW).map(|mut r| r.remove(0))).collect();
        if let Some(sols) = sols {
            found = Some((m, sols));
            break;
        }
    }
    let (exponent, exponent_witnesses) =
        found.ok_or_else(|| Error::Budget(format!("no exponent dividing {bound} certified within window {MAX_WINDOW}")))?;
    Ok(InfiniteGenerators { kind, cz, canonical, x, cyclic_generator: w, exponent, exponent_witnesses, literal_z: literal })
}

/// Coordinates of Laurent vectors keyed by (slot, g, k).
fn laurent_keys(v: &ModuleElement, keys: &mut BTreeMap<(usize, usize, i64), usize>) {
    for (slot, coord) in v.coords.iter().enumerate() {
        for (k, row) in coord.terms() {
            for (g, x) in row.iter().enumerate() {
                if !x.is_zero() {
                    let n = keys.len();
                    keys.entry((slot, g, k)).or_insert(n);
                }
            }
        }
    }
}

fn laurent_row(v: &ModuleElement, keys: &BTreeMap<(usize, usize, i64), usize>) -> Vec<BigInt> {
    let mut row = vec![BigInt::zero(); keys.len()];
    for (slot, coord) in v.coords.iter().enumerate() {
        for (k, r) in coord.terms() {
            for (g, x) in r.iter().enumerate() {
                if !x.is_zero() {
                    row[keys[&(slot, g, k)]] = x.clone();
                }
            }
        }
    }
    row
}

/// Products y·(g cᵏ) for |k| ≤ window, with their multipliers.
fn window_products(group: &Arc<FiniteGroup>, ys: &[ModuleElement], window: i64) -> Result<Vec<(usize, usize, i64, ModuleElement)>> {
    let mut out = Vec::new();
    for (j, y) in ys.iter().enumerate() {
        for k in -window..=window {
            for g in 0..group.order() {
                let m = LaurentElement::monomial(group.clone(), g, k, BigInt::one());
                out.push((j, g, k, y.act(&m)?));
            }
        }
    }
    Ok(out)
}

fn windows(max: i64) -> impl Iterator<Item = i64> {
    [0, 1, 2, 4, 8, 16].into_iter().filter(move |&w| w <= max)
}

/// r_y ∈ ℤH with Σ y·r_y = target, searched over growing c-windows.
pub fn solve_laurent(group: &Arc<FiniteGroup>, ys: &[ModuleElement], target: &ModuleElement, max_window: i64) -> Option<Vec<LaurentElement>> {
    for w in windows(max_window) {
        let prods = window_products(group, ys, w).ok()?;
        let mut keys = BTreeMap::new();
        laurent_keys(target, &mut keys);
        for (.., v) in &prods {
            laurent_keys(v, &mut keys);
        }
        let rows: Vec<Vec<BigInt>> = prods.iter().map(|(.., v)| laurent_row(v, &keys)).collect();
        if let Some(c) = integer_combination(&rows, &laurent_row(target, &keys)) {
            let mut out = vec![LaurentElement::zero(group.clone()); ys.len()];
            for ((j, g, k, _), x) in prods.iter().zip(c) {
                out[*j].add_term(*g, *k, x);
            }
            return Some(out);
        }
    }
    None
}

/// Whether target ∈ YℤH + qℤH^k, searched over growing c-windows; q prime.
pub fn spans_laurent_mod(group: &Arc<FiniteGroup>, ys: &[ModuleElement], target: &ModuleElement, q: u64, max_window: i64) -> Result<bool> {
    let qb = BigInt::from(q);
    for w in windows(max_window) {
        let prods = window_products(group, ys, w)?;
        let mut keys = BTreeMap::new();
        laurent_keys(target, &mut keys);
        for (.., v) in &prods {
            laurent_keys(v, &mut keys);
        }
        let res = |r: Vec<BigInt>| -> Vec<u64> { r.iter().map(|x| x.mod_floor(&qb).to_u64().expect("residue")).collect() };
        let rows: Vec<Vec<u64>> = prods.iter().map(|(.., v)| res(laurent_row(v, &keys))).collect();
        let a = FpMatrix::from_residue_rows(q, keys.len(), rows)?;
        if solve_mod_p(&a, &res(laurent_row(target, &keys)))?.is_some() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// r_y ∈ ℤG with Σ y·r_y = target in a lattice.
pub fn solve_lattice(m: &ZGLattice, ys: &[Vec<BigInt>], target: &[BigInt]) -> Option<Vec<Vec<(BigInt, usize)>>> {
    let order = m.group().order();
    let rows = m.orbit_rows(ys);
    let c = integer_combination(&rows, target)?;
    let mut out = vec![Vec::new(); ys.len()];
    for (idx, x) in c.into_iter().enumerate() {
        if !x.is_zero() {
            out[idx / order].push((x, idx % order));
        }
    }
    Some(out)
}

/// Ring element of factor i written as single-syllable words.
pub fn lattice_ring(factor: usize, r: &[(BigInt, usize)]) -> Vec<(BigInt, NormalWord)> {
    r.iter().map(|(x, g)| (x.clone(), if *g == 0 { vec![] } else { vec![Syllable { factor, g: *g, c: 0 }] })).collect()
}

pub fn laurent_ring(factor: usize, r: &LaurentElement) -> Vec<(BigInt, NormalWord)> {
    r.to_triples()
        .into_iter()
        .map(|(g, k, x)| (x, if g == 0 && k == 0 { vec![] } else { vec![Syllable { factor, g, c: k }] }))
        .collect()
}

/// p'-part of m.
pub fn coprime_part(m: u64, p: u64) -> u64 {
    let mut m = m;
    while m % p == 0 {
        m /= p;
    }
    m
}
