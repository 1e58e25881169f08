use std::sync::Arc;

use crate::error::Result;
use crate::exactla::{check_prime, EchelonBasis};
use crate::groups::{any_combination, FiniteGroup};

use super::FpGModule;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BruteForce {
    Value(usize),
    CapExceeded,
}

fn decode(mut x: u64, p: u64, dim: usize) -> Vec<u64> {
    let mut v = vec![0u64; dim];
    for slot in v.iter_mut() {
        *slot = x % p;
        x /= p;
    }
    v
}

/// Exact d_G(N) by exhaustive search over k-subsets of nonzero vectors, for k = 1, 2, ….
/// Gives up once (p^dim)^k exceeds `cap`.
pub fn brute_force_d(n: &FpGModule, cap: u128) -> Result<BruteForce> {
    if n.dim() == 0 {
        return Ok(BruteForce::Value(0));
    }
    let size = (n.p() as u128).checked_pow(n.dim() as u32);
    let Some(size) = size else { return Ok(BruteForce::CapExceeded) };
    let vectors: Vec<u64> = (1..size as u64).collect();
    let mut k = 1usize;
    loop {
        match size.checked_pow(k as u32) {
            Some(work) if work <= cap => {}
            _ => return Ok(BruteForce::CapExceeded),
        }
        let mut failure = None;
        let found = any_combination(&vectors, k, &mut |set| {
            let seeds: Vec<Vec<u64>> = set.iter().map(|&x| decode(x, n.p(), n.dim())).collect();
            match n.generates(&seeds) {
                Ok(g) => g,
                Err(e) => {
                    failure = Some(e);
                    true
                }
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        if found {
            return Ok(BruteForce::Value(k));
        }
        k += 1;
    }
}

/// J(𝔽_pG) = {x : xy nilpotent for all y}, by enumeration; `None` if p^|G| exceeds `cap`.
pub fn radical_exhaustive(group: &Arc<FiniteGroup>, p: u64, cap: u64) -> Result<Option<EchelonBasis>> {
    check_prime(p)?;
    let n = group.order();
    let Some(size) = p.checked_pow(n as u32).filter(|&s| s <= cap) else { return Ok(None) };
    let mul = |x: &[u64], y: &[u64]| -> Vec<u64> {
        let mut out = vec![0u64; n];
        for (a, &u) in x.iter().enumerate() {
            if u == 0 {
                continue;
            }
            for (b, &v) in y.iter().enumerate() {
                if v != 0 {
                    let k = group.mul(a, b);
                    out[k] = (out[k] + u * v) % p;
                }
            }
        }
        out
    };
    let nilpotent = |x: &[u64]| {
        let mut w = x.to_vec();
        for _ in 1..n {
            if w.iter().all(|&c| c == 0) {
                return true;
            }
            w = mul(&w, x);
        }
        w.iter().all(|&c| c == 0)
    };
    let all: Vec<Vec<u64>> = (0..size).map(|x| decode(x, p, n)).collect();
    let mut basis = EchelonBasis::new(p, n);
    for x in &all {
        if basis.contains(x) {
            continue;
        }
        if all.iter().all(|y| nilpotent(&mul(x, y))) {
            basis.insert(x);
        }
    }
    Ok(Some(basis))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_examples() {
        let c3 = Arc::new(FiniteGroup::cyclic(3).unwrap());
        let reg = FpGModule::regular(c3, 3).unwrap();
        assert_eq!(brute_force_d(&reg, 1 << 20).unwrap(), BruteForce::Value(1));
        let v4 = Arc::new(FiniteGroup::abelian(&[2, 2]).unwrap());
        let sum = FpGModule::regular(v4.clone(), 2).unwrap().direct_sum(&FpGModule::trivial(v4, 2).unwrap()).unwrap();
        assert_eq!(brute_force_d(&sum, 1 << 20).unwrap(), BruteForce::Value(2));
        assert_eq!(brute_force_d(&sum, 10).unwrap(), BruteForce::CapExceeded);
    }

    #[test]
    fn exhaustive_radical_matches_layers() {
        for (g, p) in [
            (FiniteGroup::symmetric3().unwrap(), 2),
            (FiniteGroup::symmetric3().unwrap(), 3),
            (FiniteGroup::cyclic(6).unwrap(), 2),
            (FiniteGroup::abelian(&[2, 2]).unwrap(), 2),
            (FiniteGroup::cyclic(4).unwrap(), 3),
        ] {
            let g = Arc::new(g);
            let exhaustive = radical_exhaustive(&g, p, 1000).unwrap().unwrap();
            let layers = super::super::group_algebra(&g, p).unwrap();
            assert_eq!(exhaustive.basis(), layers.radical().basis(), "{} at {p}", g.name());
        }
    }
}
