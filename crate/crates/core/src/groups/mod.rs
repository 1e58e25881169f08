//! Finite groups by multiplication table, words, presentations and factor specs.

mod factor;
mod words;

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::exactla::primes::{prime_divisors, valuation};

pub use factor::{parse_factor, parse_factor_list, parse_finite_group, FactorSpec, PrimeSet};
pub use words::{natural_presentation, Letter, Presentation, Word};

/// A finite group stored as a multiplication table. Element 0 is the identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteGroup {
    name: String,
    order: usize,
    table: Vec<u32>,
    inverse: Vec<u32>,
    generators: Vec<usize>,
    invariants: Option<Vec<u64>>,
}

impl FiniteGroup {
    /// Builds a group from a table, verifying the axioms and that `generators` generate.
    pub fn from_table(name: impl Into<String>, order: usize, table: Vec<u32>, generators: Vec<usize>) -> Result<Self> {
        let name = name.into();
        if order == 0 || table.len() != order * order {
            return Err(Error::InvalidGroup(format!("{name}: table shape does not match order {order}")));
        }
        if table.iter().any(|&x| x as usize >= order) {
            return Err(Error::InvalidGroup(format!("{name}: table entry out of range")));
        }
        let m = |a: usize, b: usize| table[a * order + b] as usize;
        for a in 0..order {
            if m(0, a) != a || m(a, 0) != a {
                return Err(Error::InvalidGroup(format!("{name}: element 0 is not the identity")));
            }
        }
        let mut inverse = vec![0u32; order];
        for a in 0..order {
            let Some(b) = (0..order).find(|&b| m(a, b) == 0) else {
                return Err(Error::InvalidGroup(format!("{name}: element {a} has no inverse")));
            };
            if m(b, a) != 0 {
                return Err(Error::InvalidGroup(format!("{name}: one-sided inverse for {a}")));
            }
            inverse[a] = b as u32;
        }
        for a in 0..order {
            for b in 0..order {
                let ab = m(a, b);
                for c in 0..order {
                    if m(ab, c) != m(a, m(b, c)) {
                        return Err(Error::InvalidGroup(format!("{name}: multiplication is not associative")));
                    }
                }
            }
        }
        if generators.iter().any(|&g| g >= order) {
            return Err(Error::InvalidGroup(format!("{name}: generator index out of range")));
        }
        let g = FiniteGroup { name, order, table, inverse, generators, invariants: None };
        if g.closure(&g.generators).len() != order {
            return Err(Error::InvalidGroup(format!("{}: generators do not generate", g.name)));
        }
        Ok(g)
    }

    /// Group generated by permutations of `0..degree` (images as vectors).
    pub fn from_permutations(name: impl Into<String>, perms: &[Vec<usize>]) -> Result<Self> {
        let name = name.into();
        let degree = perms.first().map_or(0, Vec::len);
        for p in perms {
            let mut seen = p.clone();
            seen.sort_unstable();
            if p.len() != degree || seen != (0..degree).collect::<Vec<_>>() {
                return Err(Error::InvalidGroup(format!("{name}: not a permutation of 0..{degree}")));
            }
        }
        let compose = |a: &[usize], b: &[usize]| -> Vec<usize> { (0..degree).map(|i| b[a[i]]).collect() };
        let mut elems: Vec<Vec<usize>> = vec![(0..degree).collect()];
        let mut index = std::collections::HashMap::new();
        index.insert(elems[0].clone(), 0usize);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for p in perms {
                let q = compose(&elems[i], p);
                if !index.contains_key(&q) {
                    index.insert(q.clone(), elems.len());
                    queue.push_back(elems.len());
                    elems.push(q);
                }
            }
        }
        let order = elems.len();
        let mut table = vec![0u32; order * order];
        for a in 0..order {
            for b in 0..order {
                table[a * order + b] = index[&compose(&elems[a], &elems[b])] as u32;
            }
        }
        let generators = perms.iter().map(|p| index[p]).collect();
        Self::from_table(name, order, table, generators)
    }

    pub fn trivial() -> Self {
        FiniteGroup { name: "1".into(), order: 1, table: vec![0], inverse: vec![0], generators: vec![], invariants: Some(vec![]) }
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGroup("cyclic group of order 0".into()));
        }
        if n == 1 {
            return Ok(Self::trivial());
        }
        let mut g = Self::abelian_unchecked(&[n])?;
        g.name = format!("C{n}");
        Ok(g)
    }

    /// Abelian group ℤ/m_1 × … × ℤ/m_k with the coordinate generators.
    pub fn abelian(factors: &[u64]) -> Result<Self> {
        if factors.is_empty() {
            return Ok(Self::trivial());
        }
        if factors.iter().any(|&m| m < 2) {
            return Err(Error::InvalidGroup(format!("abelian invariant factors must be >= 2, got {factors:?}")));
        }
        Self::abelian_unchecked(factors)
    }

    fn abelian_unchecked(factors: &[u64]) -> Result<Self> {
        let order: usize = factors.iter().map(|&m| m as usize).product();
        let digits = |mut x: usize| -> Vec<usize> {
            let mut d = vec![0; factors.len()];
            for i in (0..factors.len()).rev() {
                d[i] = x % factors[i] as usize;
                x /= factors[i] as usize;
            }
            d
        };
        let encode = |d: &[usize]| d.iter().zip(factors).fold(0usize, |acc, (&x, &m)| acc * m as usize + x);
        let mut table = vec![0u32; order * order];
        for a in 0..order {
            let da = digits(a);
            for b in 0..order {
                let s: Vec<usize> = digits(b).iter().zip(&da).zip(factors).map(|((x, y), &m)| (x + y) % m as usize).collect();
                table[a * order + b] = encode(&s) as u32;
            }
        }
        let generators = (0..factors.len())
            .map(|i| {
                let mut d = vec![0; factors.len()];
                d[i] = 1;
                encode(&d)
            })
            .collect();
        let name = factors.iter().map(|m| format!("C{m}")).collect::<Vec<_>>().join("x");
        let mut g = Self::from_table(name, order, table, generators)?;
        g.invariants = Some(normalize_invariants(factors));
        Ok(g)
    }

    pub fn direct_product(g: &FiniteGroup, h: &FiniteGroup) -> Result<Self> {
        let (m, n) = (g.order, h.order);
        let order = m * n;
        let mut table = vec![0u32; order * order];
        for a in 0..order {
            for b in 0..order {
                let x = g.mul(a / n, b / n);
                let y = h.mul(a % n, b % n);
                table[a * order + b] = (x * n + y) as u32;
            }
        }
        let mut generators: Vec<usize> = g.generators.iter().map(|&x| x * n).collect();
        generators.extend(h.generators.iter().copied());
        let mut p = Self::from_table(format!("{}x{}", g.name, h.name), order, table, generators)?;
        if let (Some(a), Some(b)) = (&g.invariants, &h.invariants) {
            let mut all = a.clone();
            all.extend(b);
            p.invariants = Some(normalize_invariants(&all));
        }
        Ok(p)
    }

    /// Dihedral group of order `2n`, generated by a reflection and a rotation.
    pub fn dihedral(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGroup("dihedral group needs n >= 2".into()));
        }
        let rot: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        let refl: Vec<usize> = (0..n).map(|i| (n - i) % n).collect();
        Self::from_permutations(format!("D{}", 2 * n), &[refl, rot])
    }

    pub fn symmetric3() -> Result<Self> {
        Self::from_permutations("S3", &[vec![1, 0, 2], vec![1, 2, 0]])
    }

    pub fn alternating4() -> Result<Self> {
        Self::from_permutations("A4", &[vec![1, 0, 3, 2], vec![1, 2, 0, 3]])
    }

    /// Quaternion group of order 8.
    pub fn quaternion8() -> Result<Self> {
        let mut g = Self::dicyclic(2)?;
        g.name = "Q8".into();
        Ok(g)
    }

    /// Dicyclic group of order `4n`: ⟨a, x | a²ⁿ, x² = aⁿ, x⁻¹ax = a⁻¹⟩.
    pub fn dicyclic(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGroup("dicyclic group needs n >= 2".into()));
        }
        let m = 2 * n;
        // Elements aᵏ ↦ k and aᵏx ↦ m + k, acting on themselves by right multiplication.
        let mul = |u: usize, v: usize| -> usize {
            let (k, s) = (u % m, u / m);
            let (l, t) = (v % m, v / m);
            match (s, t) {
                (0, 0) => (k + l) % m,
                (0, _) => m + (k + l) % m,
                (_, 0) => m + (k + m - l) % m,
                _ => (k + m - l + n) % m,
            }
        };
        let a: Vec<usize> = (0..2 * m).map(|u| mul(u, 1)).collect();
        let x: Vec<usize> = (0..2 * m).map(|u| mul(u, m)).collect();
        Self::from_permutations(format!("Dic{}", 4 * n), &[a, x])
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn order(&self) -> usize {
        self.order
    }
    pub fn identity(&self) -> usize {
        0
    }
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }
    pub fn table(&self) -> &[u32] {
        &self.table
    }

    /// Normalized abelian invariants, when known from construction.
    pub fn abelian_invariants(&self) -> Option<&[u64]> {
        self.invariants.as_deref()
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a] as usize
    }

    pub fn pow(&self, a: usize, k: i64) -> usize {
        let base = if k < 0 { self.inv(a) } else { a };
        (0..k.unsigned_abs()).fold(0, |acc, _| self.mul(acc, base))
    }

    pub fn commutator(&self, a: usize, b: usize) -> usize {
        self.mul(self.mul(a, b), self.mul(self.inv(a), self.inv(b)))
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..self.order).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Subgroup generated by `gens`, sorted.
    pub fn closure(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order];
        seen[0] = true;
        let mut out = vec![0];
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    out.push(y);
                    queue.push_back(y);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// π(G): primes dividing the order.
    pub fn primes(&self) -> BTreeSet<u64> {
        prime_divisors(self.order as u64)
    }

    /// Nilpotent iff each Sylow subgroup is normal, i.e. the p-elements number exactly |G|_p.
    pub fn is_nilpotent(&self) -> bool {
        self.primes().into_iter().all(|p| {
            let pk = p.pow(valuation(self.order as u64, p));
            let count = (0..self.order).filter(|&a| is_power_of(self.element_order(a) as u64, p)).count();
            count as u64 == pk
        })
    }

    /// d(G/G′Gᵖ).
    pub fn frattini_rank(&self, p: u64) -> usize {
        let mut gens: Vec<usize> = (0..self.order).map(|a| self.pow(a, p as i64)).collect();
        for a in 0..self.order {
            for b in 0..self.order {
                gens.push(self.commutator(a, b));
            }
        }
        gens.sort_unstable();
        gens.dedup();
        let n = self.closure(&gens).len();
        valuation((self.order / n) as u64, p) as usize
    }

    /// d(G) for nilpotent G.
    pub fn min_generators(&self) -> Result<usize> {
        if !self.is_nilpotent() {
            return Err(Error::Hypothesis(format!("{} is not nilpotent", self.name)));
        }
        Ok(self.primes().into_iter().map(|p| self.frattini_rank(p)).max().unwrap_or(0))
    }

    /// Exhaustive d(G) for any finite group; `None` if no generating set of size ≤ `cap` exists.
    pub fn min_generators_exhaustive(&self, cap: usize) -> Option<usize> {
        if self.order == 1 {
            return Some(0);
        }
        let elems: Vec<usize> = (1..self.order).collect();
        (1..=cap).find(|&k| any_combination(&elems, k, &mut |s| self.closure(s).len() == self.order))
    }

    /// {p : d(G/G′Gᵖ) = d(G)} for nilpotent G.
    pub fn generating_primes(&self) -> Result<PrimeSet> {
        let d = self.min_generators()?;
        if d == 0 {
            return Ok(PrimeSet::All);
        }
        Ok(PrimeSet::Finite(self.primes().into_iter().filter(|&p| self.frattini_rank(p) == d).collect()))
    }

    /// Right-regular permutation of `g`: h ↦ hg.
    pub fn right_regular(&self, g: usize) -> Vec<usize> {
        (0..self.order).map(|h| self.mul(h, g)).collect()
    }

    /// Short stable digest of the multiplication table.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update((self.order as u64).to_le_bytes());
        for x in &self.table {
            h.update(x.to_le_bytes());
        }
        for g in &self.generators {
            h.update((*g as u64).to_le_bytes());
        }
        hex::encode(&h.finalize()[..12])
    }
}

fn is_power_of(mut n: u64, p: u64) -> bool {
    while n % p == 0 {
        n /= p;
    }
    n == 1
}

/// Calls `f` on each k-subset of `items` until it returns true.
pub fn any_combination<T: Copy>(items: &[T], k: usize, f: &mut dyn FnMut(&[T]) -> bool) -> bool {
    fn rec<T: Copy>(items: &[T], k: usize, start: usize, cur: &mut Vec<T>, f: &mut dyn FnMut(&[T]) -> bool) -> bool {
        if cur.len() == k {
            return f(cur);
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            if rec(items, k, i + 1, cur, f) {
                return true;
            }
            cur.pop();
        }
        false
    }
    rec(items, k, 0, &mut Vec::with_capacity(k), f)
}

/// Rewrites invariant factors as a divisibility chain m_1 | … | m_k with m_1 > 1.
pub fn normalize_invariants(factors: &[u64]) -> Vec<u64> {
    let mut powers: std::collections::BTreeMap<u64, Vec<u64>> = Default::default();
    for &m in factors {
        for p in prime_divisors(m) {
            powers.entry(p).or_default().push(p.pow(valuation(m, p)));
        }
    }
    let k = powers.values().map(Vec::len).max().unwrap_or(0);
    let mut out = vec![1u64; k];
    for mut list in powers.into_values() {
        list.sort_unstable_by(|a, b| b.cmp(a));
        for (i, q) in list.into_iter().enumerate() {
            out[k - 1 - i] *= q;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors() {
        let c6 = FiniteGroup::cyclic(6).unwrap();
        assert_eq!(c6.order(), 6);
        assert_eq!(c6.min_generators().unwrap(), 1);
        let v4 = FiniteGroup::abelian(&[2, 2]).unwrap();
        assert_eq!(v4.min_generators().unwrap(), 2);
        assert_eq!((1..4).filter(|&a| v4.element_order(a) == 2).count(), 3);
        let p = FiniteGroup::direct_product(&FiniteGroup::cyclic(2).unwrap(), &FiniteGroup::cyclic(3).unwrap()).unwrap();
        assert_eq!(p.abelian_invariants(), Some(&[6u64][..]));
        assert!(FiniteGroup::cyclic(0).is_err());
        assert!(FiniteGroup::abelian(&[1, 2]).is_err());
    }

    #[test]
    fn primes_and_generating_primes() {
        assert_eq!(FiniteGroup::cyclic(6).unwrap().primes(), BTreeSet::from([2, 3]));
        assert!(FiniteGroup::trivial().primes().is_empty());
        let v4 = FiniteGroup::abelian(&[2, 2]).unwrap();
        assert_eq!(v4.generating_primes().unwrap(), PrimeSet::Finite(BTreeSet::from([2])));
        let c6 = FiniteGroup::cyclic(6).unwrap();
        assert_eq!(c6.generating_primes().unwrap(), PrimeSet::Finite(BTreeSet::from([2, 3])));
    }

    #[test]
    fn named_groups() {
        let cases = [
            (FiniteGroup::symmetric3().unwrap(), 6, false),
            (FiniteGroup::dihedral(4).unwrap(), 8, true),
            (FiniteGroup::quaternion8().unwrap(), 8, true),
            (FiniteGroup::alternating4().unwrap(), 12, false),
            (FiniteGroup::dihedral(5).unwrap(), 10, false),
            (FiniteGroup::dihedral(6).unwrap(), 12, false),
            (FiniteGroup::dicyclic(3).unwrap(), 12, false),
        ];
        for (g, order, nilpotent) in cases {
            assert_eq!(g.order(), order, "{}", g.name());
            assert_eq!(g.is_nilpotent(), nilpotent, "{}", g.name());
            assert!(!g.is_abelian());
            assert_eq!(g.min_generators_exhaustive(3), Some(2), "{}", g.name());
        }
        assert!(FiniteGroup::symmetric3().unwrap().min_generators().is_err());
        assert_eq!(FiniteGroup::quaternion8().unwrap().min_generators().unwrap(), 2);
    }

    #[test]
    fn invariants_normalized() {
        assert_eq!(normalize_invariants(&[2, 3]), vec![6]);
        assert_eq!(normalize_invariants(&[4, 2, 3]), vec![2, 12]);
        assert_eq!(normalize_invariants(&[]), Vec::<u64>::new());
    }
}
