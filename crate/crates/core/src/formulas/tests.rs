use super::*;
use crate::groups::parse_factor_list;

fn problem(s: &str, module: ModuleKind) -> FreeProductProblem {
    FreeProductProblem::new(parse_factor_list(s).unwrap(), module).unwrap()
}

#[test]
fn bergman_examples() {
    assert_eq!(bergman_mod_p(&problem("C2*C3", ModuleKind::Augmentation), 2).unwrap().sum, 2);
    let row = bergman_mod_p(&problem("C2xZ,C3xZ", ModuleKind::Relation), 2).unwrap();
    assert_eq!(row.components, vec![2, 1]);
}

#[test]
fn induced_examples() {
    assert_eq!(d_induced(&problem("C2*C3", ModuleKind::Augmentation)).unwrap().result, 2);
    assert_eq!(d_induced(&problem("C2xC2*C3xC3", ModuleKind::Relation)).unwrap().result, 5);
    let r = d_induced(&problem("C2xZ,C3xZ", ModuleKind::Relation)).unwrap();
    assert_eq!(r.result, 3);
    assert_eq!(r.argmax, vec![2, 3]);
    assert_eq!(r.generic_row().unwrap().sum, 2);
}

#[test]
fn coprime_augmentation_examples() {
    let r = coprime_augmentation(&problem("C2*C3", ModuleKind::Augmentation)).unwrap();
    assert_eq!((r.result, r.gap), (2, Some(0)));
    let r = coprime_augmentation(&problem("C2xC2*C3", ModuleKind::Augmentation)).unwrap();
    assert_eq!((r.result, r.gap), (3, Some(0)));
    let r = coprime_augmentation(&problem("C2xC2*C3xC3", ModuleKind::Augmentation)).unwrap();
    assert_eq!((r.result, r.gap), (3, Some(1)));
    assert!(matches!(coprime_augmentation(&problem("C2*C4", ModuleKind::Augmentation)), Err(Error::Hypothesis(_))));
}

#[test]
fn coprime_relation_examples() {
    let r = coprime_relation(&problem("C2*C3", ModuleKind::Relation)).unwrap();
    assert_eq!((r.result, r.adef), (2, Some(0)));
    let r = coprime_relation(&problem("C2xC2*C3xC3*C5xC5", ModuleKind::Relation)).unwrap();
    assert_eq!((r.result, r.adef), (7, Some(1)));
    let r = coprime_relation(&problem("C2xC2", ModuleKind::Relation)).unwrap();
    assert_eq!(r.result, 3);
}

#[test]
fn mixed_augmentation_examples() {
    let r = mixed_augmentation(&problem("C2xZ,C3xZ", ModuleKind::Augmentation)).unwrap();
    assert_eq!((r.result, r.gap), (3, Some(1)));
    let r = mixed_augmentation(&problem("C2xZ,C3", ModuleKind::Augmentation)).unwrap();
    assert_eq!((r.result, r.gap), (3, Some(0)));
    let r = mixed_augmentation(&problem("C2xZ", ModuleKind::Augmentation)).unwrap();
    assert_eq!((r.result, r.gap), (2, Some(0)));
    let r = mixed_augmentation(&problem("Nil(C2xC2,rank=2),C3", ModuleKind::Augmentation)).unwrap();
    assert_eq!((r.result, r.gap), (5, Some(0)));
}

#[test]
fn mixed_relation_examples() {
    assert_eq!(mixed_relation(&problem("C2xZ,C3xZ", ModuleKind::Relation)).unwrap().result, 3);
    assert_eq!(mixed_relation(&problem("C2xZ", ModuleKind::Relation)).unwrap().result, 2);
    assert_eq!(mixed_relation(&problem("C2xZ,C3xZ,C5xZ", ModuleKind::Relation)).unwrap().result, 4);
    assert!(mixed_relation(&problem("C2xZ,C4xZ", ModuleKind::Relation)).is_err());
    assert!(matches!(d_induced(&problem("Nil(C2,rank=2)", ModuleKind::Relation)), Err(Error::Hypothesis(_))));
}

#[test]
fn kernel_counts() {
    let p = problem("C2*C3", ModuleKind::Augmentation);
    let relation = coprime_relation(&FreeProductProblem { module: ModuleKind::Relation, ..p.clone() }).unwrap();
    assert_eq!(resolution_kernel_count(&p, 1).unwrap().result, relation.result);
    assert_eq!(resolution_kernel_count(&p, 3).unwrap().result, 2);
    assert!(matches!(resolution_kernel_count(&p, 2), Err(Error::Hypothesis(_))));
    let v4 = problem("C2xC2", ModuleKind::Augmentation);
    assert!(matches!(resolution_kernel_count(&v4, 1), Err(Error::Hypothesis(_))));
    let v4 = v4.with_periods(vec![0]).unwrap();
    assert_eq!(resolution_kernel_count(&v4, 1).unwrap().result, 3);
}

#[test]
fn nilpotent_gap_examples() {
    let v = nilpotent_gap_zero(&problem("C2xC2,Z", ModuleKind::Augmentation)).unwrap();
    match v {
        GapZeroVerdict::GapZero(p) => {
            assert_eq!(p.q, Some(2));
            assert_eq!(p.d_group, 3);
        }
        GapZeroVerdict::CriterionNotMet { .. } => panic!("criterion holds"),
    }
    assert!(matches!(nilpotent_gap_zero(&problem("C6*C35", ModuleKind::Augmentation)).unwrap(), GapZeroVerdict::GapZero(_)));
    assert!(matches!(
        nilpotent_gap_zero(&problem("C2xC2*C3xC3", ModuleKind::Augmentation)).unwrap(),
        GapZeroVerdict::CriterionNotMet { .. }
    ));
}

#[test]
fn bridson_arithmetic() {
    assert_eq!(bridson_q(2), BigInt::from(8));
    assert_eq!(bridson_q(3), BigInt::from(63));
    assert_eq!(bridson_q(4), BigInt::from(624));
    assert_eq!(bridson_tweedale(&[2, 3]).unwrap().result, 3);
    assert_eq!(bridson_tweedale(&[2]).unwrap().result, 2);
    assert!(matches!(bridson_tweedale(&[2, 4]), Err(Error::Hypothesis(_))));
    assert!(bridson_tweedale(&[1]).is_err());
}

#[test]
fn refuses_normal_generator_count() {
    assert!(matches!(relation_normal_rank(&problem("C2xC2*C3xC3", ModuleKind::Relation)), Err(Error::Unsupported(_))));
}
