use std::collections::BTreeSet;
use std::sync::Arc;

use gengap::exactla::{integer_kernel, rref, smith_normal_form, FpMatrix, IntMatrix};
use gengap::gring::{FoxImage, GroupRingElement, LaurentElement};
use gengap::groups::{FiniteGroup, Letter, Word};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..=8, 1usize..=8).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(-5i64..=5, c), r))
}

/// Rank over ℚ by fraction-based elimination.
fn rational_rank(rows: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<BigRational>> =
        rows.iter().map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect()).collect();
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..a.len()).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(rank, p);
        for i in 0..a.len() {
            if i != rank && !a[i][c].is_zero() {
                let f = &a[i][c] / &a[rank][c];
                let pivot = a[rank].clone();
                for (x, y) in a[i].iter_mut().zip(&pivot) {
                    *x -= &f * y;
                }
            }
        }
        rank += 1;
    }
    rank
}

proptest! {
    #[test]
    fn smith_form_is_exact(rows in matrix()) {
        let cols = rows[0].len();
        let a = IntMatrix::from_i64(&rows, cols).unwrap();
        let s = smith_normal_form(&a);
        prop_assert_eq!(s.u.mul(&a).unwrap().mul(&s.v).unwrap(), s.d.clone());
        prop_assert!(s.u.determinant().unwrap().abs().is_one());
        prop_assert!(s.v.determinant().unwrap().abs().is_one());
        for i in 0..s.d.rows() {
            for j in 0..s.d.cols() {
                if i != j {
                    prop_assert!(s.d.get(i, j).is_zero());
                }
            }
        }
        for w in s.factors.windows(2) {
            prop_assert!(!w[0].is_negative());
            prop_assert!(w[1].is_zero() || (!w[0].is_zero() && w[1].is_multiple_of(&w[0])));
        }
        prop_assert_eq!(s.rank(), rational_rank(&rows));
    }

    #[test]
    fn rref_is_idempotent(rows in matrix(), p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13])) {
        let cols = rows[0].len();
        let m = FpMatrix::from_rows(p, cols, &rows).unwrap();
        let first = rref(&m);
        let second = rref(&first.row_basis);
        prop_assert_eq!(second.row_basis.row_vecs(), first.row_basis.row_vecs());
        prop_assert_eq!(second.pivots, first.pivots);
        prop_assert!(m.mul(&first.kernel.transpose()).unwrap().is_zero());
        prop_assert_eq!(first.rank + first.kernel.rows(), cols);
    }

    #[test]
    fn integer_kernel_reduces_into_mod_p_kernel(rows in matrix()) {
        let cols = rows[0].len();
        let a = IntMatrix::from_i64(&rows, cols).unwrap();
        let k = integer_kernel(&a);
        prop_assert!(k.mul(&a).unwrap().is_zero());
        prop_assert_eq!(k.rows(), rows.len() - rational_rank(&rows));
        for p in [2u64, 3, 5, 7, 11, 13] {
            let am = FpMatrix::from_rows(p, cols, &rows).unwrap();
            for v in k.row_vecs() {
                let r: Vec<u64> = v.iter().map(|x| x.mod_floor(&BigInt::from(p)).try_into().unwrap()).collect();
                prop_assert!(am.apply(&r).iter().all(|&x| x == 0));
            }
        }
    }
}

fn small_groups() -> Vec<FiniteGroup> {
    let mut out: Vec<FiniteGroup> = (1..=24).map(|n| FiniteGroup::cyclic(n).unwrap()).collect();
    for inv in [vec![2, 2], vec![2, 4], vec![3, 3], vec![2, 2, 2], vec![2, 6], vec![2, 2, 4], vec![2, 2, 6], vec![2, 12], vec![2, 2, 2, 2]] {
        out.push(FiniteGroup::abelian(&inv).unwrap());
    }
    for n in 2..=12 {
        out.push(FiniteGroup::dihedral(n).unwrap());
    }
    for n in 2..=6 {
        out.push(FiniteGroup::dicyclic(n).unwrap());
    }
    out.push(FiniteGroup::symmetric3().unwrap());
    out.push(FiniteGroup::alternating4().unwrap());
    out.push(FiniteGroup::quaternion8().unwrap());
    let s3 = FiniteGroup::symmetric3().unwrap();
    let c2 = FiniteGroup::cyclic(2).unwrap();
    let c3 = FiniteGroup::cyclic(3).unwrap();
    out.push(FiniteGroup::direct_product(&s3, &c2).unwrap());
    out.push(FiniteGroup::direct_product(&s3, &c3).unwrap());
    out.push(FiniteGroup::direct_product(&FiniteGroup::alternating4().unwrap(), &c2).unwrap());
    out.push(FiniteGroup::direct_product(&FiniteGroup::quaternion8().unwrap(), &c3).unwrap());
    out
}

#[test]
fn group_axioms_hold_for_small_groups() {
    for g in small_groups() {
        let n = g.order();
        assert!(n <= 24, "{}", g.name());
        let e = g.identity();
        for a in 0..n {
            assert_eq!(g.mul(e, a), a);
            assert_eq!(g.mul(a, e), a);
            assert_eq!(g.mul(a, g.inv(a)), e);
            assert_eq!(g.mul(g.inv(a), a), e);
            for b in 0..n {
                let ab = g.mul(a, b);
                for c in 0..n {
                    assert_eq!(g.mul(ab, c), g.mul(a, g.mul(b, c)), "{}", g.name());
                }
            }
        }
        assert_eq!(g.closure(g.generators()).len(), n, "{}", g.name());
    }
}

fn prime_divisors(n: usize) -> BTreeSet<u64> {
    (2..=n as u64).filter(|&p| n as u64 % p == 0 && (2..p).all(|d| p % d != 0)).collect()
}

#[test]
fn primes_of_products_are_unions() {
    let groups = small_groups();
    for g in groups.iter().filter(|g| g.order() <= 8) {
        assert_eq!(g.primes(), prime_divisors(g.order()));
        for h in groups.iter().filter(|h| h.order() <= 6) {
            let gh = FiniteGroup::direct_product(g, h).unwrap();
            let union: BTreeSet<u64> = g.primes().union(&h.primes()).copied().collect();
            assert_eq!(gh.primes(), union);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn abelian_rank_is_invariant_factor_count(factors in prop::collection::vec(2u64..=6, 0..=3)) {
        let g = FiniteGroup::abelian(&factors).unwrap();
        // Invariant-factor count is the largest number of factors sharing a prime.
        let count = (2u64..=5)
            .filter(|&p| (2..p).all(|d| p % d != 0))
            .map(|p| factors.iter().filter(|&&m| m % p == 0).count())
            .max()
            .unwrap_or(0);
        prop_assert_eq!(g.min_generators().unwrap(), count);
        if g.order() <= 64 {
            prop_assert_eq!(g.min_generators_exhaustive(4), Some(count));
        }
    }
}

fn word() -> impl Strategy<Value = Word> {
    prop::collection::vec((0usize..2, prop::bool::ANY), 0..=8).prop_map(|ls| {
        let mut w = Word::empty();
        for (gen, pos) in ls {
            w = w.concat(&Word { letters: vec![Letter { gen, exp: if pos { 1 } else { -1 } }] });
        }
        w
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn fox_fundamental_identity(w in word(), n in 2u64..=4) {
        let g = Arc::new(FiniteGroup::cyclic(n).unwrap());
        let a = g.generators()[0];
        let images = [(a, 0i64), (g.identity(), 1)];
        let fox = FoxImage::new(w, &g, &images).unwrap();
        prop_assert!(fox.fundamental_residue().unwrap().is_zero());
    }

    #[test]
    fn augmentation_is_multiplicative(
        x in prop::collection::vec(-9i64..=9, 6),
        y in prop::collection::vec(-9i64..=9, 6),
        which in 0usize..3,
    ) {
        let g = Arc::new(match which {
            0 => FiniteGroup::cyclic(6).unwrap(),
            1 => FiniteGroup::symmetric3().unwrap(),
            _ => FiniteGroup::abelian(&[2, 3]).unwrap(),
        });
        let u = GroupRingElement::from_coeffs(g.clone(), x.iter().map(|&v| v.into()).collect()).unwrap();
        let v = GroupRingElement::from_coeffs(g.clone(), y.iter().map(|&v| v.into()).collect()).unwrap();
        prop_assert_eq!(u.mul(&v).unwrap().augment(), u.augment() * v.augment());
        let lu = LaurentElement::from_group_ring(&u).shift(2);
        let lv = LaurentElement::from_group_ring(&v).shift(-5);
        prop_assert_eq!(lu.mul(&lv).unwrap().augment(), lu.augment() * lv.augment());
    }
}

#[test]
fn group_ring_over_g_times_c() {
    for g in [FiniteGroup::cyclic(3).unwrap(), FiniteGroup::symmetric3().unwrap(), FiniteGroup::quaternion8().unwrap()] {
        let g = Arc::new(g);
        let order = BigInt::from(g.order());
        let c = LaurentElement::c_pow(g.clone(), 1);
        let cinv = LaurentElement::c_pow(g.clone(), -1);
        assert!(c.mul(&cinv).unwrap().sub(&LaurentElement::one(g.clone())).unwrap().is_zero());
        let ghat = LaurentElement::ghat(g.clone());
        assert!(ghat.mul(&ghat).unwrap().sub(&ghat.scale(&order)).unwrap().is_zero());
        for h in 0..g.order() {
            let x = LaurentElement::element(g.clone(), h).add(&c).unwrap();
            assert!(ghat.mul(&x).unwrap().sub(&x.mul(&ghat).unwrap()).unwrap().is_zero());
        }
    }
}
