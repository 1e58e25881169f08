use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigInt;

use super::*;
use crate::builders::{augmentation_lattice, relation_lattice};
use crate::formulas::{d_induced, FreeProductProblem, ModuleKind};
use crate::gmodule::ZGLattice;
use crate::groups::{natural_presentation, parse_factor, parse_factor_list, FiniteGroup};

fn problem(s: &str, module: ModuleKind) -> FreeProductProblem {
    FreeProductProblem::new(parse_factor_list(s).unwrap(), module).unwrap()
}

fn set(ps: &[u64]) -> BTreeSet<u64> {
    ps.iter().copied().collect()
}

fn klein() -> Arc<FiniteGroup> {
    Arc::new(FiniteGroup::abelian(&[2, 2]).unwrap())
}

#[test]
fn nested_family_for_klein_four() {
    let m = augmentation_lattice(&klein()).unwrap();
    let fam = build_nested_family(&m, &[3, 2]).unwrap();
    assert_eq!(fam.primes, vec![2, 3]);
    assert_eq!(fam.counts, vec![2, 1]);
    let rows = fam.check(&m).unwrap();
    assert!(rows.iter().all(EnestRow::holds), "{rows:?}");
    // d(M/(2M + X₃ℤG)) = 2 − 1.
    assert_eq!(rows[0].residual, 1);
    assert_eq!(residual_count(&m, fam.minimal(), 2).unwrap(), 1);
}

#[test]
fn singleton_family_is_one_minimal_set() {
    let m = augmentation_lattice(&klein()).unwrap();
    let fam = build_nested_family(&m, &[2]).unwrap();
    assert_eq!(fam.counts, vec![2]);
    assert_eq!(fam.minimal().len(), 2);
    assert!(build_nested_family(&m, &[]).is_err());
    assert!(build_nested_family(&m, &[4]).is_err());
}

#[test]
fn good_module_checks() {
    let c6 = Arc::new(FiniteGroup::cyclic(6).unwrap());
    let w = check_good(&augmentation_lattice(&c6).unwrap(), &set(&[2, 3]), &set(&[2, 3, 5])).unwrap();
    assert_eq!(w.delta, 1);
    assert!(w.exponent >= BigInt::from(1));
    assert!(w.outside_counts.iter().all(|&(_, d)| d <= 1));

    let r = relation_lattice(&natural_presentation(klein()).unwrap()).unwrap().lattice;
    let w = check_good(&r, &set(&[2]), &set(&[2, 3])).unwrap();
    assert_eq!(w.delta, 2);

    let w = check_good(&ZGLattice::zero(klein()), &set(&[]), &set(&[2])).unwrap();
    assert_eq!(w.delta, 0);
    assert!(check_good(&r, &set(&[2]), &set(&[2])).is_err());
}

#[test]
fn infinite_factor_examples() {
    let aug = infinite_factor_generators(&parse_factor("C2xZ").unwrap(), InfiniteKind::Augmentation).unwrap();
    assert_eq!(4 % aug.exponent, 0);
    let rel = infinite_factor_generators(&parse_factor("C2xZ").unwrap(), InfiniteKind::Relation).unwrap();
    assert_eq!(4 % rel.exponent, 0);
    assert!(rel.cz.in_relation_module(&rel.x).unwrap());
    for n in [2u64, 3] {
        let g = infinite_factor_generators(&parse_factor(&format!("C{n}xZ")).unwrap(), InfiniteKind::Relation).unwrap();
        assert_eq!((n * n) % g.exponent, 0);
        for q in [5u64, 7] {
            for v in &g.canonical {
                assert!(spans_laurent_mod(g.cz.group(), std::slice::from_ref(&g.x), v, q, 4).unwrap());
            }
        }
    }
    assert!(infinite_factor_generators(&parse_factor("Nil(C2xC2,rank=2)").unwrap(), InfiniteKind::Augmentation).is_err());
}

#[test]
fn synthesizes_two_generators_for_c2_star_c3() {
    let pr = problem("C2*C3", ModuleKind::Augmentation);
    let s = synthesize_generators(&pr).unwrap();
    assert_eq!(s.certificate.generators.len(), 2);
    match &s.verdict {
        Verdict::Verified { depth, .. } => assert!(*depth <= 3),
        v => panic!("{v:?}"),
    }
    assert!(matches!(verify_certificate(&s.certificate, &pr, 0).unwrap(), Verdict::Incomplete { .. }));
    let mut short = s.certificate.clone();
    short.generators.pop();
    assert!(matches!(verify_certificate(&short, &pr, DEFAULT_DEPTH_CAP).unwrap(), Verdict::Refuted { .. }));
}

#[test]
fn synthesizes_three_generators_for_klein_star_c3_squared() {
    let pr = problem("C2xC2*C3xC3", ModuleKind::Augmentation);
    let s = synthesize_generators(&pr).unwrap();
    assert_eq!(s.certificate.generators.len(), 3);
    assert!(s.verdict.is_verified(), "{:?}", s.verdict);
    let sizes: usize = s.certificate.block_sizes.iter().sum();
    assert_eq!(s.certificate.generators.len(), sizes + (3 - sizes));
}

#[test]
fn synthesizes_relation_generators_for_cyclic_times_z() {
    let pr = problem("C2xZ,C3xZ", ModuleKind::Relation);
    let start = Instant::now();
    let s = synthesize_generators(&pr).unwrap();
    assert_eq!(s.certificate.generators.len(), 3);
    assert_eq!(s.certificate.generators.len(), d_induced(&pr).unwrap().result);
    match &s.verdict {
        Verdict::Verified { depth, .. } => assert!(*depth <= 6),
        v => panic!("{v:?}"),
    }
    assert!(start.elapsed().as_secs() < 10);
    let json = serde_json::to_string(&s.certificate).unwrap();
    let back: GenerationCertificate = serde_json::from_str(&json).unwrap();
    assert_eq!(back, s.certificate);
}
