use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

use super::{natural_presentation, FiniteGroup, Presentation};

/// A set of primes that may be "all primes".
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrimeSet {
    Finite(BTreeSet<u64>),
    All,
}

impl PrimeSet {
    pub fn contains(&self, p: u64) -> bool {
        match self {
            PrimeSet::Finite(s) => s.contains(&p),
            PrimeSet::All => true,
        }
    }
}

impl Serialize for PrimeSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PrimeSet::Finite(set) => set.serialize(s),
            PrimeSet::All => s.serialize_str("all"),
        }
    }
}

/// One free factor H_i of a free product.
#[derive(Clone, Debug)]
pub enum FactorSpec {
    Finite { group: Arc<FiniteGroup>, presentation: Option<Presentation> },
    /// C_n × ℤ with presentation ⟨x, c | xⁿ, [x, c]⟩.
    CyclicTimesZ { n: u64 },
    /// G × ℤʳ with G finite nilpotent.
    NilpotentProduct { group: Arc<FiniteGroup>, rank: usize },
}

impl FactorSpec {
    pub fn finite(group: FiniteGroup) -> Self {
        let group = Arc::new(group);
        let presentation = natural_presentation(group.clone()).ok();
        FactorSpec::Finite { group, presentation }
    }

    pub fn cyclic_times_z(n: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGroup(format!("C{n}xZ needs n >= 2")));
        }
        Ok(FactorSpec::CyclicTimesZ { n })
    }

    pub fn nilpotent_product(group: FiniteGroup, rank: usize) -> Result<Self> {
        if !group.is_nilpotent() {
            return Err(Error::Hypothesis(format!("{} is not nilpotent", group.name())));
        }
        Ok(FactorSpec::NilpotentProduct { group: Arc::new(group), rank })
    }

    /// The torsion part G_i.
    pub fn finite_part(&self) -> Arc<FiniteGroup> {
        match self {
            FactorSpec::Finite { group, .. } | FactorSpec::NilpotentProduct { group, .. } => group.clone(),
            FactorSpec::CyclicTimesZ { n } => Arc::new(FiniteGroup::cyclic(*n).expect("n >= 2")),
        }
    }

    /// Rank of the free abelian part A_i.
    pub fn free_rank(&self) -> usize {
        match self {
            FactorSpec::Finite { .. } => 0,
            FactorSpec::CyclicTimesZ { .. } => 1,
            FactorSpec::NilpotentProduct { rank, .. } => *rank,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank() == 0
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank() == 0 && self.finite_part().order() == 1
    }

    pub fn primes(&self) -> BTreeSet<u64> {
        self.finite_part().primes()
    }

    /// d(H_i). Nilpotent factors use d(G) + r; other finite groups are searched exhaustively.
    pub fn min_generators_group(&self) -> Result<usize> {
        let g = self.finite_part();
        let dg = if g.is_nilpotent() {
            g.min_generators()?
        } else if self.is_finite() {
            g.min_generators_exhaustive(6).ok_or_else(|| Error::Budget(format!("d({}) exceeds search cap", g.name())))?
        } else {
            return Err(Error::Hypothesis(format!("{} is not nilpotent", g.name())));
        };
        Ok(dg + self.free_rank())
    }

    pub fn generating_primes(&self) -> Result<PrimeSet> {
        let g = self.finite_part();
        g.generating_primes()
    }

    pub fn label(&self) -> String {
        match self {
            FactorSpec::Finite { group, .. } => group.name().to_string(),
            FactorSpec::CyclicTimesZ { n } => format!("C{n}xZ"),
            FactorSpec::NilpotentProduct { group, rank } => format!("Nil({},rank={rank})", group.name()),
        }
    }
}

impl fmt::Display for FactorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

fn schema(message: String) -> Error {
    Error::Schema { field: "factors".into(), message }
}

fn parse_atom(atom: &str) -> Result<FiniteGroup> {
    let num = |s: &str| s.parse::<usize>().map_err(|_| schema(format!("bad group literal {atom:?}")));
    if atom == "1" {
        return Ok(FiniteGroup::trivial());
    }
    if let Some(rest) = atom.strip_prefix("Dic") {
        let n = num(rest)?;
        if n % 4 != 0 {
            return Err(schema(format!("dicyclic order must be a multiple of 4: {atom}")));
        }
        return FiniteGroup::dicyclic(n / 4);
    }
    if let Some(rest) = atom.strip_prefix('C') {
        return FiniteGroup::cyclic(num(rest)? as u64);
    }
    if let Some(rest) = atom.strip_prefix('D') {
        let n = num(rest)?;
        if n % 2 != 0 {
            return Err(schema(format!("dihedral order must be even: {atom}")));
        }
        return FiniteGroup::dihedral(n / 2);
    }
    match atom {
        "S3" => FiniteGroup::symmetric3(),
        "A4" => FiniteGroup::alternating4(),
        "Q8" => FiniteGroup::quaternion8(),
        _ => Err(schema(format!("unknown group literal {atom:?}"))),
    }
}

/// Parses a finite group literal such as `C6`, `C2xC2`, `S3`, `D8xC3`.
pub fn parse_finite_group(s: &str) -> Result<FiniteGroup> {
    let atoms: Vec<&str> = s.split('x').map(str::trim).filter(|a| !a.is_empty()).collect();
    if atoms.is_empty() {
        return Err(schema(format!("empty group literal {s:?}")));
    }
    let cyclic: Option<Vec<u64>> = atoms.iter().map(|a| a.strip_prefix('C').and_then(|n| n.parse().ok())).collect();
    if let Some(orders) = cyclic {
        let orders: Vec<u64> = orders.into_iter().filter(|&m| m != 1).collect();
        if orders.iter().any(|&m| m == 0) {
            return Err(Error::InvalidGroup("cyclic group of order 0".into()));
        }
        return match orders.as_slice() {
            [] => Ok(FiniteGroup::trivial()),
            [m] => FiniteGroup::cyclic(*m),
            _ => FiniteGroup::abelian(&orders),
        };
    }
    let mut g = parse_atom(atoms[0])?;
    for a in &atoms[1..] {
        g = FiniteGroup::direct_product(&g, &parse_atom(a)?)?;
    }
    Ok(g)
}

/// Parses one factor of the inline grammar: `C6`, `C2xC2`, `C5xZ`, `ZxZ`, `Nil(C2,rank=2)`.
pub fn parse_factor(s: &str) -> Result<FactorSpec> {
    let s = s.trim();
    if let Some(inner) = s.strip_prefix("Nil(").and_then(|r| r.strip_suffix(')')) {
        let (g, r) = inner.split_once(',').ok_or_else(|| schema(format!("expected Nil(G,rank=r): {s}")))?;
        let r = r.trim().trim_start_matches("rank").trim().trim_start_matches('=').trim();
        let rank: usize = r.parse().map_err(|_| schema(format!("bad rank in {s}")))?;
        return FactorSpec::nilpotent_product(parse_finite_group(g.trim())?, rank);
    }
    let parts: Vec<&str> = s.split('x').map(str::trim).collect();
    let rank = parts.iter().filter(|&&p| p == "Z").count();
    let finite: Vec<&str> = parts.iter().copied().filter(|&p| p != "Z").collect();
    let group = if finite.is_empty() { FiniteGroup::trivial() } else { parse_finite_group(&finite.join("x"))? };
    match rank {
        0 => Ok(FactorSpec::finite(group)),
        1 if group.order() >= 2 && group.abelian_invariants().is_some_and(|inv| inv.len() == 1) => {
            FactorSpec::cyclic_times_z(group.order() as u64)
        }
        _ => FactorSpec::nilpotent_product(group, rank),
    }
}

/// Parses a comma- or `*`-separated factor list.
pub fn parse_factor_list(s: &str) -> Result<Vec<FactorSpec>> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if depth == 0 && (ch == ',' || ch == '*') {
            out.push(parse_factor(&cur)?);
            cur.clear();
        } else {
            cur.push(ch);
        }
    }
    if !cur.trim().is_empty() {
        out.push(parse_factor(&cur)?);
    }
    if out.is_empty() {
        return Err(schema("no factors given".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_grammar() {
        assert!(matches!(parse_factor("C5xZ").unwrap(), FactorSpec::CyclicTimesZ { n: 5 }));
        assert!(matches!(parse_factor("C6").unwrap(), FactorSpec::Finite { .. }));
        let f = parse_factor("Nil(C2,rank=2)").unwrap();
        assert_eq!(f.free_rank(), 2);
        assert_eq!(f.min_generators_group().unwrap(), 3);
        let z2 = parse_factor("ZxZ").unwrap();
        assert_eq!(z2.generating_primes().unwrap(), PrimeSet::All);
        assert_eq!(parse_factor_list("C2*C3").unwrap().len(), 2);
        assert_eq!(parse_factor_list("Nil(C2,rank=1),C3").unwrap().len(), 2);
        assert!(parse_factor("Nil(S3,rank=1)").is_err());
        assert!(parse_factor("C0").is_err());
    }

    #[test]
    fn nilpotent_product_counts() {
        let f = FactorSpec::nilpotent_product(FiniteGroup::cyclic(2).unwrap(), 1).unwrap();
        assert_eq!(f.min_generators_group().unwrap(), 2);
        assert_eq!(FactorSpec::cyclic_times_z(3).unwrap().min_generators_group().unwrap(), 2);
    }
}
