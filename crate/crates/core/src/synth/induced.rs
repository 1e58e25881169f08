use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmodule::ZGLattice;
use crate::gring::ModuleElement;
use crate::groups::FiniteGroup;

/// A nontrivial element (g, cᵏ) of one factor; k = 0 for finite factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(usize, usize, i64)", into = "(usize, usize, i64)")]
pub struct Syllable {
    pub factor: usize,
    pub g: usize,
    pub c: i64,
}

impl From<(usize, usize, i64)> for Syllable {
    fn from((factor, g, c): (usize, usize, i64)) -> Self {
        Syllable { factor, g, c }
    }
}

impl From<Syllable> for (usize, usize, i64) {
    fn from(s: Syllable) -> Self {
        (s.factor, s.g, s.c)
    }
}

/// Normal-form word in the free product: consecutive syllables lie in different factors.
pub type NormalWord = Vec<Syllable>;

/// The factors H_i = G_i × ℤ^{0 or 1} of a free product.
#[derive(Clone, Debug)]
pub struct FreeProduct {
    groups: Vec<Arc<FiniteGroup>>,
    infinite: Vec<bool>,
}

impl FreeProduct {
    pub fn new(groups: Vec<Arc<FiniteGroup>>, infinite: Vec<bool>) -> Self {
        FreeProduct { groups, infinite }
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn group(&self, i: usize) -> &Arc<FiniteGroup> {
        &self.groups[i]
    }

    pub fn is_infinite(&self, i: usize) -> bool {
        self.infinite[i]
    }

    fn merge(&self, a: Syllable, b: Syllable) -> Option<Syllable> {
        let g = self.groups[a.factor].mul(a.g, b.g);
        let c = a.c + b.c;
        (g != 0 || c != 0).then_some(Syllable { factor: a.factor, g, c })
    }

    /// w·s in normal form.
    pub fn push(&self, w: &mut NormalWord, s: Syllable) {
        match w.last() {
            Some(&last) if last.factor == s.factor => {
                w.pop();
                if let Some(m) = self.merge(last, s) {
                    w.push(m);
                }
            }
            _ => w.push(s),
        }
    }

    pub fn check_syllable(&self, s: Syllable) -> Result<()> {
        let ok = s.factor < self.len()
            && s.g < self.groups[s.factor].order()
            && (self.infinite[s.factor] || s.c == 0)
            && (s.g != 0 || s.c != 0);
        if ok {
            Ok(())
        } else {
            Err(Error::Schema { field: "syllable".into(), message: format!("{s:?} is not a nontrivial factor element") })
        }
    }

    pub fn check_word(&self, w: &[Syllable]) -> Result<()> {
        for s in w {
            self.check_syllable(*s)?;
        }
        if w.windows(2).any(|p| p[0].factor == p[1].factor) {
            return Err(Error::Schema { field: "word".into(), message: "adjacent syllables from one factor".into() });
        }
        Ok(())
    }

    /// Generator length: one per nontrivial finite part, plus |k| for the cᵏ part.
    pub fn length(w: &[Syllable]) -> usize {
        w.iter().map(|s| usize::from(s.g != 0) + s.c.unsigned_abs() as usize).sum()
    }

    fn generators(&self) -> Vec<Syllable> {
        let mut out = Vec::new();
        for (i, g) in self.groups.iter().enumerate() {
            out.extend((1..g.order()).map(|x| Syllable { factor: i, g: x, c: 0 }));
            if self.infinite[i] {
                out.push(Syllable { factor: i, g: 0, c: 1 });
                out.push(Syllable { factor: i, g: 0, c: -1 });
            }
        }
        out
    }

    /// All elements of length ≤ `radius`, in breadth-first order.
    pub fn ball(&self, radius: usize) -> Vec<NormalWord> {
        let gens = self.generators();
        let mut seen: BTreeSet<NormalWord> = BTreeSet::new();
        let mut out = vec![Vec::new()];
        seen.insert(Vec::new());
        let mut queue = VecDeque::from([(Vec::new(), 0usize)]);
        while let Some((w, d)) = queue.pop_front() {
            if d == radius {
                continue;
            }
            for &s in &gens {
                let mut v: NormalWord = w.clone();
                self.push(&mut v, s);
                if seen.insert(v.clone()) {
                    out.push(v.clone());
                    queue.push_back((v, d + 1));
                }
            }
        }
        out
    }
}

/// Basis element m ⊗ w of M_i ⊗ ℤG: a lattice basis vector (head trivial), or a
/// free-module basis vector e_slot·(g, cᵏ) of ℤH_i^k, followed by a coset word.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Key {
    pub summand: usize,
    pub slot: usize,
    pub g: usize,
    pub c: i64,
    pub tail: NormalWord,
}

/// How a summand's local basis is acted on.
#[derive(Clone, Debug)]
pub enum LocalAction {
    /// Images of basis vectors under every group element: `images[g][b]`.
    Lattice(Vec<Vec<Vec<BigInt>>>),
    /// Free ℤH_i-module: basis vectors permuted by right multiplication.
    Free,
}

impl LocalAction {
    pub fn lattice(m: &ZGLattice) -> Self {
        let r = m.rank();
        let images = (0..m.group().order())
            .map(|g| {
                (0..r)
                    .map(|b| {
                        let mut e = vec![BigInt::zero(); r];
                        e[b] = BigInt::from(1);
                        m.act(&e, g)
                    })
                    .collect()
            })
            .collect();
        LocalAction::Lattice(images)
    }
}

/// Element of ⊕_i M_i ⊗_{ℤH_i} ℤG with finite support.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InducedElement {
    pub terms: BTreeMap<Key, BigInt>,
}

impl InducedElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, key: Key, coeff: &BigInt) {
        if coeff.is_zero() {
            return;
        }
        let e = self.terms.entry(key.clone()).or_insert_with(BigInt::zero);
        *e += coeff;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add_scaled(&mut self, other: &InducedElement, k: &BigInt) {
        for (key, v) in &other.terms {
            self.add_term(key.clone(), &(v * k));
        }
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        let mut out = Self::zero();
        out.add_scaled(self, k);
        out
    }

    /// Lattice vector of summand i placed at the trivial coset.
    pub fn from_lattice(summand: usize, v: &[BigInt]) -> Self {
        let mut out = Self::zero();
        for (b, x) in v.iter().enumerate() {
            out.add_term(Key { summand, slot: b, g: 0, c: 0, tail: vec![] }, x);
        }
        out
    }

    /// Vector of ℤH_i^k placed at the trivial coset.
    pub fn from_free(summand: usize, v: &ModuleElement) -> Self {
        let mut out = Self::zero();
        for (slot, coord) in v.coords.iter().enumerate() {
            for (k, row) in coord.terms() {
                for (g, x) in row.iter().enumerate() {
                    out.add_term(Key { summand, slot, g, c: k, tail: vec![] }, x);
                }
            }
        }
        out
    }

    pub fn act_syllable(&self, fp: &FreeProduct, actions: &[LocalAction], s: Syllable) -> Self {
        let mut out = Self::zero();
        for (key, coeff) in &self.terms {
            if key.tail.is_empty() && s.factor == key.summand {
                match &actions[key.summand] {
                    LocalAction::Lattice(images) => {
                        for (b, x) in images[s.g][key.slot].iter().enumerate() {
                            if !x.is_zero() {
                                out.add_term(Key { summand: key.summand, slot: b, g: 0, c: 0, tail: vec![] }, &(x * coeff));
                            }
                        }
                    }
                    LocalAction::Free => {
                        let g = fp.group(key.summand).mul(key.g, s.g);
                        out.add_term(Key { g, c: key.c + s.c, ..key.clone() }, coeff);
                    }
                }
            } else {
                let mut k = key.clone();
                fp.push(&mut k.tail, s);
                out.add_term(k, coeff);
            }
        }
        out
    }

    pub fn act_word(&self, fp: &FreeProduct, actions: &[LocalAction], w: &[Syllable]) -> Self {
        w.iter().fold(self.clone(), |acc, &s| acc.act_syllable(fp, actions, s))
    }

    /// Σ coeff·(self·word).
    pub fn act_ring(&self, fp: &FreeProduct, actions: &[LocalAction], r: &[(BigInt, NormalWord)]) -> Self {
        let mut out = Self::zero();
        for (k, w) in r {
            out.add_scaled(&self.act_word(fp, actions, w), k);
        }
        out
    }

    pub fn divisible_by(&self, q: &BigInt) -> bool {
        self.terms.values().all(|v| (v % q).is_zero())
    }
}

/// Serialized term: `[summand, slot, g, k, tail, coefficient]`.
pub type TermJson = (usize, usize, usize, i64, NormalWord, String);

impl Serialize for InducedElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<TermJson> =
            self.terms.iter().map(|(k, v)| (k.summand, k.slot, k.g, k.c, k.tail.clone(), v.to_string())).collect();
        terms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for InducedElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let terms: Vec<TermJson> = Vec::deserialize(d)?;
        let mut out = InducedElement::zero();
        for (summand, slot, g, c, tail, v) in terms {
            let v: BigInt = v.parse().map_err(serde::de::Error::custom)?;
            out.add_term(Key { summand, slot, g, c, tail }, &v);
        }
        Ok(out)
    }
}
