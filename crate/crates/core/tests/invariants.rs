use std::sync::Arc;

use gengap::builders::{augmentation_lattice, relation_lattice, swan_witness};
use gengap::formulas::{bergman_mod_p, d_induced, FreeProductProblem, ModuleKind};
use gengap::gmodule::{FiniteZGModule, FpGModule};
use gengap::groups::{natural_presentation, parse_factor_list, FiniteGroup};
use gengap::synth::{synthesize_generators, Verdict};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn groups() -> Vec<Arc<FiniteGroup>> {
    let mut out: Vec<FiniteGroup> = (2..=12).map(|n| FiniteGroup::cyclic(n).unwrap()).collect();
    for inv in [vec![2, 2], vec![2, 4], vec![2, 2, 2], vec![3, 3], vec![2, 6]] {
        out.push(FiniteGroup::abelian(&inv).unwrap());
    }
    for n in [3, 4, 5, 6] {
        out.push(FiniteGroup::dihedral(n).unwrap());
    }
    out.push(FiniteGroup::quaternion8().unwrap());
    out.push(FiniteGroup::dicyclic(3).unwrap());
    out.push(FiniteGroup::alternating4().unwrap());
    out.into_iter().map(Arc::new).collect()
}

fn problem(s: &str, module: ModuleKind) -> FreeProductProblem {
    FreeProductProblem::new(parse_factor_list(s).unwrap(), module).unwrap()
}

fn nakayama_holds(m: &FpGModule) -> bool {
    let top = m.quotient(&m.radical().unwrap()).unwrap();
    top.min_generators().unwrap() == m.min_generators().unwrap()
}

#[test]
fn generator_count_is_read_off_the_head() {
    for g in groups() {
        let delta = augmentation_lattice(&g).unwrap();
        let rel = relation_lattice(&natural_presentation(g.clone()).unwrap()).unwrap().lattice;
        for p in [2u64, 3, 5] {
            assert!(nakayama_holds(&FpGModule::regular(g.clone(), p).unwrap()), "regular {} mod {p}", g.name());
            assert!(nakayama_holds(&delta.reduce_mod(p).unwrap()), "Δ{} mod {p}", g.name());
            assert!(nakayama_holds(&rel.reduce_mod(p).unwrap()), "R({}) mod {p}", g.name());
        }
    }
}

#[test]
fn relation_sequence_ranks_and_splitting() {
    for g in groups() {
        let pres = natural_presentation(g.clone()).unwrap();
        let d_f = pres.generators().len();
        let n = g.order();
        let rel = relation_lattice(&pres).unwrap().lattice;
        assert_eq!(rel.rank() as i64 - (d_f * n) as i64 + (n as i64 - 1), 0, "{}", g.name());
        let delta = augmentation_lattice(&g).unwrap();
        for q in [5u64, 7, 11, 13].into_iter().filter(|q| n as u64 % q != 0) {
            let rq = rel.reduce_mod(q).unwrap();
            assert_eq!(rq.dim() + delta.reduce_mod(q).unwrap().dim(), d_f * n);
            assert_eq!(rq.min_generators().unwrap(), d_f, "{} mod {q}", g.name());
        }
    }
}

#[test]
fn swan_primes_divide_the_order() {
    for g in groups() {
        let rel = relation_lattice(&natural_presentation(g.clone()).unwrap()).unwrap();
        let hints = rel.relator_coords().unwrap();
        let w = swan_witness(&rel.lattice, &hints, 500).unwrap().unwrap_or_else(|| panic!("R({})", g.name()));
        assert_eq!(g.order() as u64 % w.p, 0, "R({})", g.name());
    }
}

#[test]
fn composition_series_can_be_reordered() {
    let c2 = Arc::new(FiniteGroup::cyclic(2).unwrap());
    let c3 = Arc::new(FiniteGroup::cyclic(3).unwrap());
    let modules = [
        FiniteZGModule::new(c2.clone(), vec![5, 5, 3], vec![vec![vec![1, 0, 0], vec![0, -1, 0], vec![0, 0, -1]]]).unwrap(),
        FiniteZGModule::new(c2, vec![7, 7, 5, 5], vec![vec![vec![0, 1, 0, 0], vec![1, 0, 0, 0], vec![0, 0, 1, 0], vec![0, 0, 0, -1]]]).unwrap(),
        FiniteZGModule::new(c3, vec![7, 7, 2, 2], vec![vec![vec![2, 0, 0, 0], vec![0, 4, 0, 0], vec![0, 0, 0, 1], vec![0, 0, 1, 1]]]).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for m in modules {
        let base = m.composition_series().unwrap();
        for _ in 0..6 {
            let mut target = base.factors.clone();
            target.shuffle(&mut rng);
            let s = m.reorder_series(&target).unwrap();
            assert_eq!(s.factors, target);
            assert!(s.orders.windows(2).all(|w| w[0] > w[1]), "{:?}", s.orders);
            assert_eq!(*s.orders.last().unwrap(), 1);
            assert!(m.verify_series(&s).unwrap());
        }
    }
}

const CORPUS: [(&str, ModuleKind); 8] = [
    ("C2*C3", ModuleKind::Augmentation),
    ("C2xC2*C3", ModuleKind::Augmentation),
    ("C2*C3*C5", ModuleKind::Augmentation),
    ("C2xC2*C3xC3", ModuleKind::Relation),
    ("C4*C3", ModuleKind::Relation),
    ("S3*C5", ModuleKind::Augmentation),
    ("C2xZ,C3xZ", ModuleKind::Relation),
    ("C2xZ,C3", ModuleKind::Augmentation),
];

#[test]
fn prime_tables_are_consistent() {
    for (s, kind) in CORPUS {
        let pr = problem(s, kind);
        let r = d_induced(&pr).unwrap();
        let max = r.per_prime.iter().map(|row| row.sum).max().unwrap();
        assert_eq!(r.result, max, "{s}");
        assert!(r.argmax.iter().any(|p| r.row(*p).is_some_and(|row| !row.generic)), "{s}: max only at the good prime");
        for row in &r.per_prime {
            assert_eq!(bergman_mod_p(&pr, row.p).unwrap().sum, row.sum, "{s} at {}", row.p);
        }
    }
    for s in ["C6", "C2xC2", "S3", "C3xZ"] {
        let pr = problem(s, ModuleKind::Augmentation);
        let whole = d_induced(&pr).unwrap().result;
        let g = pr.factors[0].finite_part();
        if pr.factors[0].is_finite() {
            let delta = augmentation_lattice(&g).unwrap();
            let direct = [2u64, 3, 5, 7].iter().map(|&p| delta.reduce_mod(p).unwrap().min_generators().unwrap()).max().unwrap();
            assert_eq!(whole, direct, "{s}");
        } else {
            assert_eq!(whole, 2, "{s}");
        }
    }
}

#[test]
fn synthesized_certificates_meet_the_lower_bound() {
    for (s, kind) in CORPUS {
        let pr = problem(s, kind);
        let syn = synthesize_generators(&pr).unwrap();
        assert!(matches!(syn.verdict, Verdict::Verified { .. }), "{s}: {:?}", syn.verdict);
        let table = d_induced(&pr).unwrap();
        let size = syn.certificate.generators.len();
        let lower = bergman_mod_p(&pr, table.argmax[0]).unwrap().sum;
        assert_eq!(size, lower, "{s}");
        assert_eq!(size, table.result, "{s}");
        assert_eq!(syn.certificate.claimed, size, "{s}");
        let blocks: usize = syn.certificate.block_sizes.iter().sum();
        assert!(blocks <= size, "{s}");
    }
}
