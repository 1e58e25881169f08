use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::groups::FiniteGroup;

use super::{same_group, GroupRingElement};

/// Element of ℤ[G×C] = (ℤG)[c, c⁻¹]: c-power ↦ dense coefficients over G.
#[derive(Clone, Debug)]
pub struct LaurentElement {
    group: Arc<FiniteGroup>,
    terms: BTreeMap<i64, Vec<BigInt>>,
}

impl PartialEq for LaurentElement {
    fn eq(&self, other: &Self) -> bool {
        same_group(&self.group, &other.group) && self.terms == other.terms
    }
}

impl LaurentElement {
    pub fn zero(group: Arc<FiniteGroup>) -> Self {
        LaurentElement { group, terms: BTreeMap::new() }
    }

    /// g·cᵏ.
    pub fn monomial(group: Arc<FiniteGroup>, g: usize, k: i64, coeff: BigInt) -> Self {
        let mut e = Self::zero(group);
        e.add_term(g, k, coeff);
        e
    }

    pub fn one(group: Arc<FiniteGroup>) -> Self {
        Self::monomial(group, 0, 0, BigInt::one())
    }

    pub fn integer(group: Arc<FiniteGroup>, k: impl Into<BigInt>) -> Self {
        Self::monomial(group, 0, 0, k.into())
    }

    pub fn element(group: Arc<FiniteGroup>, g: usize) -> Self {
        Self::monomial(group, g, 0, BigInt::one())
    }

    pub fn c_pow(group: Arc<FiniteGroup>, k: i64) -> Self {
        Self::monomial(group, 0, k, BigInt::one())
    }

    pub fn ghat(group: Arc<FiniteGroup>) -> Self {
        Self::from_group_ring(&GroupRingElement::ghat(group))
    }

    pub fn from_group_ring(x: &GroupRingElement) -> Self {
        let mut e = Self::zero(x.group().clone());
        if !x.is_zero() {
            e.terms.insert(0, x.coeffs().to_vec());
        }
        e
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &[BigInt])> {
        self.terms.iter().map(|(&k, v)| (k, v.as_slice()))
    }

    pub fn coefficient(&self, g: usize, k: i64) -> BigInt {
        self.terms.get(&k).map_or_else(BigInt::zero, |v| v[g].clone())
    }

    pub fn degree_range(&self) -> Option<(i64, i64)> {
        Some((*self.terms.keys().next()?, *self.terms.keys().next_back()?))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, g: usize, k: i64, coeff: BigInt) {
        if coeff.is_zero() {
            return;
        }
        let n = self.group.order();
        let v = self.terms.entry(k).or_insert_with(|| vec![BigInt::zero(); n]);
        v[g] += coeff;
        if v.iter().all(Zero::is_zero) {
            self.terms.remove(&k);
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if same_group(&self.group, &other.group) {
            Ok(())
        } else {
            Err(Error::ContextMismatch(format!("{} vs {}", self.group.name(), other.group.name())))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (&k, v) in &other.terms {
            for (g, c) in v.iter().enumerate() {
                if !c.is_zero() {
                    out.add_term(g, k, c.clone());
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&BigInt::from(-1))
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return Self::zero(self.group.clone());
        }
        let terms = self.terms.iter().map(|(&d, v)| (d, v.iter().map(|x| x * k).collect())).collect();
        LaurentElement { group: self.group.clone(), terms }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let g = &self.group;
        let mut out = Self::zero(g.clone());
        let n = g.order();
        for (&i, u) in &self.terms {
            for (&j, v) in &other.terms {
                let mut acc = vec![BigInt::zero(); n];
                for (a, x) in u.iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    for (b, y) in v.iter().enumerate() {
                        if !y.is_zero() {
                            acc[g.mul(a, b)] += x * y;
                        }
                    }
                }
                for (h, c) in acc.into_iter().enumerate() {
                    out.add_term(h, i + j, c);
                }
            }
        }
        Ok(out)
    }

    /// Multiplies by cᵏ.
    pub fn shift(&self, k: i64) -> Self {
        LaurentElement { group: self.group.clone(), terms: self.terms.iter().map(|(&d, v)| (d + k, v.clone())).collect() }
    }

    /// Right multiplication by a group element.
    pub fn mul_group_right(&self, h: usize) -> Self {
        let g = &self.group;
        let terms = self
            .terms
            .iter()
            .map(|(&d, v)| {
                let mut w = vec![BigInt::zero(); g.order()];
                for (a, x) in v.iter().enumerate() {
                    w[g.mul(a, h)] = x.clone();
                }
                (d, w)
            })
            .collect();
        LaurentElement { group: g.clone(), terms }
    }

    /// Image under c ↦ 1.
    pub fn at_c_one(&self) -> GroupRingElement {
        let mut acc = vec![BigInt::zero(); self.group.order()];
        for v in self.terms.values() {
            for (a, x) in acc.iter_mut().zip(v) {
                *a += x;
            }
        }
        GroupRingElement::from_coeffs(self.group.clone(), acc).expect("shape")
    }

    /// Image under g ↦ 1, c ↦ 1.
    pub fn augment(&self) -> BigInt {
        self.terms.values().flatten().sum()
    }

    /// Exact quotient by (c − 1), if it exists.
    pub fn div_c_minus_1(&self) -> Option<Self> {
        if !self.at_c_one().is_zero() {
            return None;
        }
        let Some((lo, hi)) = self.degree_range() else { return Some(self.clone()) };
        let n = self.group.order();
        let mut out = Self::zero(self.group.clone());
        let mut prev = vec![BigInt::zero(); n];
        for k in lo..hi {
            let f = self.terms.get(&k);
            let q: Vec<BigInt> = (0..n).map(|g| &prev[g] - f.map_or_else(BigInt::zero, |v| v[g].clone())).collect();
            for (g, c) in q.iter().enumerate() {
                out.add_term(g, k, c.clone());
            }
            prev = q;
        }
        Some(out)
    }

    /// True iff every coefficient is divisible by `q`.
    pub fn divisible_by(&self, q: &BigInt) -> bool {
        self.terms.values().flatten().all(|x| (x % q).is_zero())
    }

    pub fn max_abs_coeff(&self) -> BigInt {
        self.terms.values().flatten().map(|x| x.abs()).max().unwrap_or_default()
    }

    /// Coefficients on the window `lo..=hi`, ordered by (power, group element).
    pub fn window_coords(&self, lo: i64, hi: i64) -> Option<Vec<BigInt>> {
        if let Some((a, b)) = self.degree_range() {
            if a < lo || b > hi {
                return None;
            }
        }
        let n = self.group.order();
        let mut out = Vec::with_capacity(n * (hi - lo + 1).max(0) as usize);
        for k in lo..=hi {
            match self.terms.get(&k) {
                Some(v) => out.extend(v.iter().cloned()),
                None => out.extend(std::iter::repeat_n(BigInt::zero(), n)),
            }
        }
        Some(out)
    }

    pub fn from_window_coords(group: Arc<FiniteGroup>, lo: i64, coords: &[BigInt]) -> Self {
        let n = group.order();
        let mut e = Self::zero(group);
        for (i, c) in coords.iter().enumerate() {
            e.add_term(i % n, lo + (i / n) as i64, c.clone());
        }
        e
    }

    /// Terms as (element, c-power, coefficient) triples.
    pub fn to_triples(&self) -> Vec<(usize, i64, BigInt)> {
        let mut out = Vec::new();
        for (&k, v) in &self.terms {
            for (g, c) in v.iter().enumerate() {
                if !c.is_zero() {
                    out.push((g, k, c.clone()));
                }
            }
        }
        out
    }
}

fn element_name(group: &FiniteGroup, g: usize) -> String {
    if g == 0 {
        return String::new();
    }
    if group.generators().len() == 1 {
        let a = group.generators()[0];
        if let Some(k) = (1..group.order()).find(|&k| group.pow(a, k as i64) == g) {
            return if k == 1 { "a".into() } else { format!("a^{k}") };
        }
    }
    format!("g{g}")
}

impl fmt::Display for LaurentElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (g, k, c) in self.to_triples() {
            let mut mono = element_name(&self.group, g);
            if k != 0 {
                let cp = if k == 1 { "c".to_string() } else { format!("c^{k}") };
                mono = if mono.is_empty() { cp } else { format!("{mono}{cp}") };
            }
            parts.push(match (mono.is_empty(), c.is_one()) {
                (true, _) => c.to_string(),
                (false, true) => mono,
                (false, false) if c == BigInt::from(-1) => format!("-{mono}"),
                (false, false) => format!("{c}{mono}"),
            });
        }
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + ").replace("+ -", "- "))
        }
    }
}

/// A row vector over ℤ[G×C], such as a Fox image in ℤH^d.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleElement {
    pub coords: Vec<LaurentElement>,
}

impl ModuleElement {
    pub fn new(coords: Vec<LaurentElement>) -> Self {
        ModuleElement { coords }
    }

    pub fn zero(group: Arc<FiniteGroup>, d: usize) -> Self {
        ModuleElement { coords: vec![LaurentElement::zero(group); d] }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.coords.len() != other.coords.len() {
            return Err(Error::ContextMismatch("module ranks differ".into()));
        }
        Ok(ModuleElement { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a.add(b)).collect::<Result<_>>()? })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        ModuleElement { coords: self.coords.iter().map(LaurentElement::neg).collect() }
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        ModuleElement { coords: self.coords.iter().map(|a| a.scale(k)).collect() }
    }

    /// Right action by a ring element.
    pub fn act(&self, r: &LaurentElement) -> Result<Self> {
        Ok(ModuleElement { coords: self.coords.iter().map(|a| a.mul(r)).collect::<Result<_>>()? })
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(LaurentElement::is_zero)
    }

    pub fn divisible_by(&self, q: &BigInt) -> bool {
        self.coords.iter().all(|a| a.divisible_by(q))
    }

    pub fn degree_range(&self) -> Option<(i64, i64)> {
        self.coords.iter().filter_map(LaurentElement::degree_range).reduce(|(a, b), (c, d)| (a.min(c), b.max(d)))
    }

    pub fn window_coords(&self, lo: i64, hi: i64) -> Option<Vec<BigInt>> {
        let mut out = Vec::new();
        for c in &self.coords {
            out.extend(c.window_coords(lo, hi)?);
        }
        Some(out)
    }
}

impl fmt::Display for ModuleElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c2() -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup::cyclic(2).unwrap())
    }

    #[test]
    fn c_inverse_and_ghat() {
        let g = c2();
        let c = LaurentElement::c_pow(g.clone(), 1);
        let ci = LaurentElement::c_pow(g.clone(), -1);
        assert_eq!(c.mul(&ci).unwrap(), LaurentElement::one(g.clone()));
        let gh = LaurentElement::ghat(g.clone());
        assert_eq!(gh.mul(&c).unwrap(), c.mul(&gh).unwrap());
        assert_eq!(gh.mul(&gh).unwrap(), gh.scale(&BigInt::from(2)));
    }

    #[test]
    fn divide_by_c_minus_1() {
        let g = c2();
        let f = LaurentElement::c_pow(g.clone(), 3).sub(&LaurentElement::c_pow(g.clone(), -1)).unwrap();
        let q = f.div_c_minus_1().unwrap();
        let cm1 = LaurentElement::c_pow(g.clone(), 1).sub(&LaurentElement::one(g.clone())).unwrap();
        assert_eq!(q.mul(&cm1).unwrap(), f);
        assert!(LaurentElement::c_pow(g, 2).div_c_minus_1().is_none());
    }

    #[test]
    fn display_is_readable() {
        let g = c2();
        let e = LaurentElement::element(g.clone(), 1).sub(&LaurentElement::c_pow(g, 1)).unwrap();
        assert_eq!(e.to_string(), "a - c");
    }
}
