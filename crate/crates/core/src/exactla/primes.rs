use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeSet;

pub fn is_prime(n: u64) -> bool {
    num_prime::nt_funcs::is_prime64(n)
}

/// Distinct prime divisors of `n` in increasing order. `0` and `1` have none.
pub fn prime_divisors(n: u64) -> BTreeSet<u64> {
    if n < 2 {
        return BTreeSet::new();
    }
    num_prime::nt_funcs::factorize64(n).into_keys().collect()
}

/// Distinct prime divisors of |n|, or `None` if one of them is at least 2³¹ or
/// factoring gives up.
pub fn small_prime_divisors(n: &BigInt) -> Option<BTreeSet<u64>> {
    const LIMIT: u64 = 1 << 31;
    const TRIAL: u64 = 1 << 12;
    const RHO_ITERATIONS: usize = 1 << 18;
    let mut rest: BigUint = n.magnitude().clone();
    let mut out = BTreeSet::new();
    if rest.is_zero() {
        return Some(out);
    }
    for q in (2..TRIAL).filter(|&q| is_prime(q)) {
        let qb = BigUint::from(q);
        if (&rest % &qb).is_zero() {
            out.insert(q);
            while (&rest % &qb).is_zero() {
                rest /= &qb;
            }
        }
    }
    let mut stack = vec![rest];
    while let Some(r) = stack.pop() {
        if r.is_one() {
            continue;
        }
        if num_prime::nt_funcs::is_prime(&r, None).probably() {
            out.insert(r.to_u64().filter(|&p| p < LIMIT)?);
            continue;
        }
        let split = (0u32..3).find_map(|t| {
            let (f, _) = num_prime::factor::pollard_rho(&r, BigUint::from(2 + t), BigUint::from(1 + t), RHO_ITERATIONS);
            f.filter(|f| !f.is_one() && f != &r)
        })?;
        stack.push(&r / &split);
        stack.push(split);
    }
    Some(out)
}

/// Exponent of `p` in `n` (n > 0).
pub fn valuation(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n > 0 && n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Smallest prime not contained in `excluded`.
pub fn smallest_prime_outside(excluded: &BTreeSet<u64>) -> u64 {
    next_primes_outside(excluded, 1)[0]
}

/// The `count` smallest primes avoiding `excluded`.
pub fn next_primes_outside(excluded: &BTreeSet<u64>, count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut n = 2;
    while out.len() < count {
        if is_prime(n) && !excluded.contains(&n) {
            out.push(n);
        }
        n += 1;
    }
    out
}

pub fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        num_integer::lcm(a, b)
    }
}

/// Inverse of `a` modulo `m` in `[0, m)`, if it exists.
pub fn inv_mod(a: i128, m: i128) -> Option<i128> {
    let (mut old_r, mut r) = (a.rem_euclid(m), m);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m))
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = ((acc as u128 * base as u128) % m as u128) as u64;
        }
        base = ((base as u128 * base as u128) % m as u128) as u64;
        exp >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn large_divisors() {
        let n = BigInt::from(21185065411489161u64) * BigInt::from(19292);
        let ps = small_prime_divisors(&n).unwrap();
        let back: BigInt = ps.iter().map(|&p| BigInt::from(p)).product();
        assert!((n % back) == BigInt::from(0));
        assert_eq!(small_prime_divisors(&BigInt::from(4294967311u64)), None);
        assert!(small_prime_divisors(&BigInt::from(1)).unwrap().is_empty());
    }

    #[test]
    fn divisors_and_outside() {
        assert_eq!(prime_divisors(12).into_iter().collect::<Vec<_>>(), vec![2, 3]);
        assert!(prime_divisors(1).is_empty());
        let ex: BTreeSet<u64> = [2, 3].into_iter().collect();
        assert_eq!(smallest_prime_outside(&ex), 5);
        assert_eq!(next_primes_outside(&ex, 3), vec![5, 7, 11]);
        assert_eq!(inv_mod(3, 2), Some(1));
        assert_eq!(inv_mod(2, 3), Some(2));
        assert_eq!(inv_mod(2, 4), None);
        assert_eq!(valuation(72, 2), 3);
    }
}
