use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::builders::{augmentation_lattice, relation_lattice, resolution_kernel, ResolutionSpec};
use crate::error::{Error, Result};
use crate::exactla::primes::{gcd, smallest_prime_outside};
use crate::gmodule::ZGLattice;
use crate::groups::{natural_presentation, FactorSpec, FiniteGroup, Presentation};

/// Which module is attached to each free factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModuleKind {
    Augmentation,
    Relation,
    Kernel(usize),
}

impl fmt::Display for ModuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModuleKind::Augmentation => write!(f, "augmentation"),
            ModuleKind::Relation => write!(f, "relation"),
            ModuleKind::Kernel(s) => write!(f, "kernel({s})"),
        }
    }
}

/// H_1 * ⋯ * H_n with one module kind for all factors.
#[derive(Clone, Debug)]
pub struct FreeProductProblem {
    pub factors: Vec<FactorSpec>,
    pub module: ModuleKind,
    /// Cohomological period per factor; 0 marks a non-periodic factor. Cyclic factors default to 2.
    pub periods: Option<Vec<u64>>,
}

impl FreeProductProblem {
    pub fn new(factors: Vec<FactorSpec>, module: ModuleKind) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidGroup("a free product needs at least one factor".into()));
        }
        if let Some(f) = factors.iter().find(|f| f.is_trivial()) {
            return Err(Error::InvalidGroup(format!("trivial free factor {f}")));
        }
        Ok(FreeProductProblem { factors, module, periods: None })
    }

    pub fn with_periods(mut self, periods: Vec<u64>) -> Result<Self> {
        if periods.len() != self.factors.len() {
            return Err(Error::ShapeMismatch(format!("{} periods for {} factors", periods.len(), self.factors.len())));
        }
        self.periods = Some(periods);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn label(&self) -> String {
        self.factors.iter().map(FactorSpec::label).collect::<Vec<_>>().join(" * ")
    }

    /// Whether the finite parts have pairwise coprime orders.
    pub fn coprime(&self) -> bool {
        let orders: Vec<u64> = self.factors.iter().map(|f| f.finite_part().order() as u64).collect();
        orders.iter().enumerate().all(|(i, &a)| orders[i + 1..].iter().all(|&b| gcd(a, b) == 1))
    }

    /// ∪ π(G_i) together with one prime outside it.
    pub fn prime_support(&self) -> (BTreeSet<u64>, u64) {
        let support: BTreeSet<u64> = self.factors.iter().flat_map(FactorSpec::primes).collect();
        let good = smallest_prime_outside(&support);
        (support, good)
    }

    pub fn period(&self, i: usize) -> Option<u64> {
        if let Some(ps) = &self.periods {
            return (ps[i] != 0).then_some(ps[i]);
        }
        match &self.factors[i] {
            FactorSpec::Finite { group, .. } if is_cyclic(group) => Some(2),
            _ => None,
        }
    }

    pub(crate) fn components(&self) -> Result<Vec<Component>> {
        (0..self.len()).map(|i| Component::new(self, i)).collect()
    }
}

impl fmt::Display for FreeProductProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.label(), self.module)
    }
}

pub(crate) fn is_cyclic(g: &FiniteGroup) -> bool {
    g.abelian_invariants().is_some_and(|inv| inv.len() <= 1)
}

/// Presentation used for a finite factor: the supplied one, or the natural one.
pub fn factor_presentation(factor: &FactorSpec) -> Result<Presentation> {
    match factor {
        FactorSpec::Finite { presentation: Some(p), .. } => Ok(p.clone()),
        FactorSpec::Finite { group, .. } => natural_presentation(group.clone()),
        _ => Err(Error::Unsupported(format!("{factor} has no finite presentation"))),
    }
}

/// One factor with its module, ready for per-prime evaluation.
pub(crate) enum Component {
    Finite { lattice: ZGLattice },
    /// ΔH for H = G × ℤ^e, e ≥ 1.
    NilpotentAugmentation { group: Arc<FiniteGroup>, rank: usize, delta: ZGLattice },
    /// Relation module of the natural presentation of C_n × ℤ.
    CyclicRelation { n: u64 },
}

impl Component {
    fn new(problem: &FreeProductProblem, i: usize) -> Result<Self> {
        let factor = &problem.factors[i];
        let kind = problem.module;
        match (factor, kind) {
            (FactorSpec::Finite { group, .. }, ModuleKind::Augmentation) => Ok(Component::Finite { lattice: augmentation_lattice(group)? }),
            (FactorSpec::Finite { .. }, ModuleKind::Relation) => {
                Ok(Component::Finite { lattice: relation_lattice(&factor_presentation(factor)?)?.lattice })
            }
            (FactorSpec::Finite { group, .. }, ModuleKind::Kernel(s)) => {
                if s == 0 {
                    return Err(Error::InvalidResolution("kernel stage must be at least 1".into()));
                }
                if let Some(l) = problem.period(i) {
                    if (s as u64 + 2) % l == 0 {
                        return Err(Error::Hypothesis(format!("factor {factor}: s + 2 = {} is divisible by the period {l}", s + 2)));
                    }
                } else if problem.periods.is_none() {
                    return Err(Error::Hypothesis(format!("factor {factor}: cohomological period must be supplied")));
                }
                let lattice = if s == 1 {
                    relation_lattice(&factor_presentation(factor)?)?.lattice
                } else if is_cyclic(group) {
                    resolution_kernel(&ResolutionSpec::periodic_cyclic(group.order() as u64, s)?, s)?
                } else {
                    return Err(Error::Unsupported(format!("no built-in resolution for {factor} beyond stage 1")));
                };
                Ok(Component::Finite { lattice })
            }
            (FactorSpec::CyclicTimesZ { n }, ModuleKind::Relation) => Ok(Component::CyclicRelation { n: *n }),
            (FactorSpec::NilpotentProduct { group, rank: 1 }, ModuleKind::Relation) if is_cyclic(group) && group.order() > 1 => {
                Ok(Component::CyclicRelation { n: group.order() as u64 })
            }
            (FactorSpec::CyclicTimesZ { .. } | FactorSpec::NilpotentProduct { .. }, ModuleKind::Augmentation) => {
                let group = factor.finite_part();
                if factor.free_rank() == 0 {
                    return Ok(Component::Finite { lattice: augmentation_lattice(&group)? });
                }
                Ok(Component::NilpotentAugmentation { delta: augmentation_lattice(&group)?, group, rank: factor.free_rank() })
            }
            (_, ModuleKind::Relation) => Err(Error::Hypothesis(format!(
                "relation module of {factor} is not a known good Swan module (only C_n x Z with its natural presentation)"
            ))),
            (_, ModuleKind::Kernel(_)) => Err(Error::Unsupported(format!("resolution kernels for the infinite factor {factor}"))),
        }
    }

    /// d_{H_i}(M_i/pM_i).
    pub(crate) fn value_at(&self, p: u64) -> Result<usize> {
        match self {
            Component::Finite { lattice } => lattice.reduce_mod(p)?.min_generators(),
            Component::NilpotentAugmentation { group, rank, delta } => {
                if group.primes().contains(&p) {
                    let finite = delta.reduce_mod(p)?.min_generators()?;
                    Ok(finite.max(group.frattini_rank(p) + rank))
                } else {
                    Ok(*rank)
                }
            }
            Component::CyclicRelation { n } => Ok(if n % p == 0 { 2 } else { 1 }),
        }
    }

    /// d_{H_i}(M_i), the maximum over π(H_i) and one good prime.
    pub(crate) fn swan_value(&self, primes: &BTreeSet<u64>) -> Result<usize> {
        let good = smallest_prime_outside(primes);
        primes.iter().copied().chain([good]).try_fold(0, |acc, p| Ok(acc.max(self.value_at(p)?)))
    }
}
