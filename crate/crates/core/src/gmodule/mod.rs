//! ℤG-lattices, 𝔽_pG-modules, radicals and minimal generator counts.

mod algebra;
mod brute;
mod series;

use std::collections::VecDeque;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exactla::primes::smallest_prime_outside;
use crate::exactla::{check_prime, smith_normal_form, EchelonBasis, FpMatrix, IntMatrix};
use crate::groups::FiniteGroup;

pub use algebra::{group_algebra, GroupAlgebra};
pub use brute::{brute_force_d, radical_exhaustive, BruteForce};
pub use series::{find_simple_submodule, identify_simple, CompositionFactor, FiniteZGModule, Series};

/// Fills in one action matrix per group element from generator matrices, checking
/// consistency along every Cayley-graph edge.
fn element_actions<M: Clone + PartialEq>(
    group: &FiniteGroup,
    gens: Vec<M>,
    identity: M,
    mul: impl Fn(&M, &M) -> M,
) -> Result<Vec<M>> {
    if gens.len() != group.generators().len() {
        return Err(Error::ShapeMismatch(format!(
            "{} action matrices for {} generators",
            gens.len(),
            group.generators().len()
        )));
    }
    let mut out: Vec<Option<M>> = vec![None; group.order()];
    out[0] = Some(identity);
    let mut queue = VecDeque::from([0usize]);
    while let Some(h) = queue.pop_front() {
        for (i, &g) in group.generators().iter().enumerate() {
            let hg = group.mul(h, g);
            let m = mul(out[h].as_ref().expect("visited"), &gens[i]);
            match &out[hg] {
                Some(existing) if *existing != m => {
                    return Err(Error::InvalidGroup(format!("action does not respect the relations of {}", group.name())));
                }
                Some(_) => {}
                None => {
                    out[hg] = Some(m);
                    queue.push_back(hg);
                }
            }
        }
    }
    Ok(out.into_iter().map(|m| m.expect("generators generate")).collect())
}

/// A free ℤ-module of finite rank with a right G-action by integer matrices.
#[derive(Clone, Debug)]
pub struct ZGLattice {
    group: Arc<FiniteGroup>,
    rank: usize,
    actions: Vec<IntMatrix>,
}

impl ZGLattice {
    pub fn new(group: Arc<FiniteGroup>, generator_actions: Vec<IntMatrix>) -> Result<Self> {
        let rank = generator_actions.first().map_or(0, IntMatrix::rows);
        if generator_actions.iter().any(|m| m.rows() != rank || m.cols() != rank) {
            return Err(Error::ShapeMismatch("action matrices must be square of equal size".into()));
        }
        let actions = element_actions(&group, generator_actions, IntMatrix::identity(rank), |a, b| a.mul(b).expect("square"))?;
        Ok(ZGLattice { group, rank, actions })
    }

    /// Lattice with action matrices given for every group element.
    pub fn from_element_actions(group: Arc<FiniteGroup>, rank: usize, all: Vec<IntMatrix>) -> Result<Self> {
        let gens = group.generators().iter().map(|&g| all[g].clone()).collect();
        let lat = Self::new(group, gens)?;
        if lat.rank != rank || lat.actions != all {
            return Err(Error::InvalidGroup("element actions are not a homomorphism".into()));
        }
        Ok(lat)
    }

    pub fn zero(group: Arc<FiniteGroup>) -> Self {
        let actions = vec![IntMatrix::zeros(0, 0); group.order()];
        ZGLattice { group, rank: 0, actions }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }
    pub fn rank(&self) -> usize {
        self.rank
    }
    pub fn action(&self, g: usize) -> &IntMatrix {
        &self.actions[g]
    }

    pub fn act(&self, v: &[BigInt], g: usize) -> Vec<BigInt> {
        self.actions[g].apply(v)
    }

    /// Rows {x·g : x ∈ X, g ∈ G}.
    pub fn orbit_rows(&self, xs: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
        xs.iter().flat_map(|x| (0..self.group.order()).map(move |g| self.act(x, g))).collect()
    }

    pub fn reduce_mod(&self, p: u64) -> Result<FpGModule> {
        check_prime(p)?;
        let m = BigInt::from(p);
        let actions = self
            .actions
            .iter()
            .map(|a| {
                let rows = a.row_vecs().into_iter().map(|r| r.iter().map(|x| x.mod_floor(&m).to_u64().expect("residue")).collect()).collect();
                FpMatrix::from_residue_rows(p, self.rank, rows)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FpGModule { group: self.group.clone(), p, dim: self.rank, actions })
    }

    /// Invariant factors of M/XℤG.
    pub fn quotient_structure(&self, xs: &[Vec<BigInt>]) -> Result<QuotientStructure> {
        if xs.iter().any(|x| x.len() != self.rank) {
            return Err(Error::ShapeMismatch("generator length differs from lattice rank".into()));
        }
        let rows = self.orbit_rows(xs);
        let mut factors: Vec<BigInt> = if rows.is_empty() {
            vec![]
        } else {
            smith_normal_form(&IntMatrix::from_rows(rows, self.rank)?).factors
        };
        factors.resize(self.rank, BigInt::zero());
        Ok(QuotientStructure { factors })
    }

    /// Smallest prime outside π(G); lattices carry no ℤ-torsion.
    pub fn good_prime(&self) -> u64 {
        smallest_prime_outside(&self.group.primes())
    }

    /// d_G(ℚM), computed at the smallest good prime.
    pub fn d_rational(&self) -> Result<usize> {
        if self.rank == 0 {
            return Ok(0);
        }
        self.reduce_mod(self.good_prime())?.min_generators()
    }
}

/// Invariant factors of a finitely generated abelian quotient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientStructure {
    /// One entry per rank, 0 encoding a free summand.
    pub factors: Vec<BigInt>,
}

impl QuotientStructure {
    pub fn is_trivial(&self) -> bool {
        self.factors.iter().all(|f| f == &BigInt::from(1))
    }

    /// Largest invariant factor, or `None` if the quotient is infinite.
    pub fn exponent(&self) -> Option<BigInt> {
        if self.factors.iter().any(Zero::is_zero) {
            return None;
        }
        Some(self.factors.iter().fold(BigInt::from(1), |acc, f| acc.lcm(f)))
    }
}

/// A finite-dimensional 𝔽_pG-module with right action matrices for every element.
#[derive(Clone, Debug)]
pub struct FpGModule {
    group: Arc<FiniteGroup>,
    p: u64,
    dim: usize,
    actions: Vec<FpMatrix>,
}

impl FpGModule {
    pub fn new(group: Arc<FiniteGroup>, p: u64, dim: usize, generator_actions: Vec<FpMatrix>) -> Result<Self> {
        check_prime(p)?;
        if generator_actions.iter().any(|m| m.rows() != dim || m.cols() != dim || m.p() != p) {
            return Err(Error::ShapeMismatch("action matrices must be square over the same field".into()));
        }
        let actions = element_actions(&group, generator_actions, FpMatrix::identity(p, dim)?, |a, b| a.mul(b).expect("square"))?;
        Ok(FpGModule { group, p, dim, actions })
    }

    /// 𝔽_pG acting on itself by right multiplication.
    pub fn regular(group: Arc<FiniteGroup>, p: u64) -> Result<Self> {
        check_prime(p)?;
        let n = group.order();
        let actions = (0..n)
            .map(|g| {
                let mut m = FpMatrix::zeros(p, n, n)?;
                for h in 0..n {
                    m.set(h, group.mul(h, g), 1);
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FpGModule { group, p, dim: n, actions })
    }

    pub fn trivial(group: Arc<FiniteGroup>, p: u64) -> Result<Self> {
        let actions = vec![FpMatrix::identity(p, 1)?; group.order()];
        Ok(FpGModule { group, p, dim: 1, actions })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }
    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn action(&self, g: usize) -> &FpMatrix {
        &self.actions[g]
    }

    pub fn act(&self, v: &[u64], g: usize) -> Vec<u64> {
        self.actions[g].apply(v)
    }

    /// v·a for a ∈ 𝔽_pG given by coefficients.
    pub fn act_algebra(&self, v: &[u64], a: &[u64]) -> Vec<u64> {
        let p = self.p;
        let mut out = vec![0u64; self.dim];
        for (g, &c) in a.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (o, x) in out.iter_mut().zip(self.act(v, g)) {
                *o = (*o + c * x) % p;
            }
        }
        out
    }

    fn check_vec(&self, v: &[u64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::ShapeMismatch(format!("vector of length {} in a module of dimension {}", v.len(), self.dim)));
        }
        Ok(())
    }

    /// Smallest submodule containing `seeds`.
    pub fn spin(&self, seeds: &[Vec<u64>]) -> Result<EchelonBasis> {
        let mut basis = EchelonBasis::new(self.p, self.dim);
        self.spin_into(&mut basis, seeds)?;
        Ok(basis)
    }

    /// Extends `basis` (assumed to be a submodule) by the submodule generated by `seeds`.
    pub fn spin_into(&self, basis: &mut EchelonBasis, seeds: &[Vec<u64>]) -> Result<()> {
        let mut queue = VecDeque::new();
        for s in seeds {
            self.check_vec(s)?;
            if basis.insert(s) {
                queue.push_back(s.clone());
            }
        }
        while let Some(v) = queue.pop_front() {
            if basis.rank() == self.dim {
                break;
            }
            for &g in self.group.generators() {
                let w = self.act(&v, g);
                if basis.insert(&w) {
                    queue.push_back(w);
                }
            }
        }
        Ok(())
    }

    /// N·rad(𝔽_pG).
    pub fn radical(&self) -> Result<EchelonBasis> {
        let alg = group_algebra(&self.group, self.p)?;
        let mut out = EchelonBasis::new(self.p, self.dim);
        for j in alg.radical().basis() {
            for e in 0..self.dim {
                let mut v = vec![0u64; self.dim];
                v[e] = 1;
                out.insert(&self.act_algebra(&v, j));
            }
        }
        Ok(out)
    }

    /// d_G(N), computed on the top N/rad N through the block decomposition of 𝔽_pG/J.
    pub fn min_generators(&self) -> Result<usize> {
        if self.dim == 0 {
            return Ok(0);
        }
        let alg = group_algebra(&self.group, self.p)?;
        let rad = self.radical()?;
        if rad.rank() == self.dim {
            return Ok(0);
        }
        let mut best = 0usize;
        for block in alg.blocks() {
            let mut span = rad.clone();
            for e in 0..self.dim {
                let mut v = vec![0u64; self.dim];
                v[e] = 1;
                span.insert(&self.act_algebra(&v, &block.idempotent));
            }
            let top = span.rank() - rad.rank();
            best = best.max(top.div_ceil(block.dim));
        }
        Ok(best)
    }

    /// An explicit generating set of size d_G(N), assembled component by component on the top.
    pub fn minimal_generating_set(&self) -> Result<Vec<Vec<u64>>> {
        let d = self.min_generators()?;
        if d == 0 {
            return Ok(vec![]);
        }
        let alg = group_algebra(&self.group, self.p)?;
        let rad = self.radical()?;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut gens = vec![vec![0u64; self.dim]; d];
        for block in alg.blocks() {
            let part: Vec<Vec<u64>> = (0..self.dim)
                .map(|e| {
                    let mut v = vec![0u64; self.dim];
                    v[e] = 1;
                    self.act_algebra(&v, &block.idempotent)
                })
                .filter(|v| !rad.contains(v))
                .collect();
            let mut full = rad.clone();
            for v in &part {
                full.insert(v);
            }
            let mut span = rad.clone();
            for g in gens.iter_mut() {
                if span.rank() == full.rank() {
                    break;
                }
                let max_gain = block.dim.min(full.rank() - span.rank());
                let mut best: Option<(Vec<u64>, EchelonBasis)> = None;
                let randoms = (0..500).map(|_| {
                    let mut x = vec![0u64; self.dim];
                    for v in &part {
                        let c = rng.gen_range(0..self.p);
                        for (xi, vi) in x.iter_mut().zip(v) {
                            *xi = (*xi + c * vi) % self.p;
                        }
                    }
                    x
                });
                for x in part.iter().cloned().chain(randoms) {
                    let mut s = span.clone();
                    self.spin_into(&mut s, &[x.clone()])?;
                    if best.as_ref().is_none_or(|(_, b)| s.rank() > b.rank()) {
                        let done = s.rank() - span.rank() == max_gain;
                        best = Some((x, s));
                        if done {
                            break;
                        }
                    }
                }
                let (x, s) = best.expect("candidates are nonempty");
                for (gi, xi) in g.iter_mut().zip(&x) {
                    *gi = (*gi + xi) % self.p;
                }
                span = s;
            }
        }
        if !self.generates(&gens)? {
            return Err(Error::Internal("greedy generator search fell short".into()));
        }
        Ok(gens)
    }

    /// N / S for a submodule S.
    pub fn quotient(&self, sub: &EchelonBasis) -> Result<FpGModule> {
        let free: Vec<usize> = (0..self.dim).filter(|c| !sub.pivots().contains(c)).collect();
        let actions = self
            .actions
            .iter()
            .map(|m| {
                let rows = free
                    .iter()
                    .map(|&j| {
                        let img = sub.reduce(m.row(j));
                        free.iter().map(|&k| img[k]).collect()
                    })
                    .collect();
                FpMatrix::from_residue_rows(self.p, free.len(), rows)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FpGModule { group: self.group.clone(), p: self.p, dim: free.len(), actions })
    }

    /// The submodule S with coordinates in its echelon basis.
    pub fn submodule(&self, sub: &EchelonBasis) -> Result<FpGModule> {
        let actions = self
            .actions
            .iter()
            .map(|m| {
                let rows = sub
                    .basis()
                    .iter()
                    .map(|b| sub.coordinates(&m.apply(b)).ok_or_else(|| Error::Internal("span is not a submodule".into())))
                    .collect::<Result<Vec<_>>>()?;
                FpMatrix::from_residue_rows(self.p, sub.rank(), rows)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FpGModule { group: self.group.clone(), p: self.p, dim: sub.rank(), actions })
    }

    /// Whether `xs` generates the module.
    pub fn generates(&self, xs: &[Vec<u64>]) -> Result<bool> {
        Ok(self.spin(xs)?.rank() == self.dim)
    }

    pub fn direct_sum(&self, other: &FpGModule) -> Result<FpGModule> {
        if self.p != other.p || self.group.table() != other.group.table() {
            return Err(Error::ContextMismatch("direct sum over different groups or fields".into()));
        }
        let d = self.dim + other.dim;
        let actions = self
            .actions
            .iter()
            .zip(&other.actions)
            .map(|(a, b)| {
                let mut m = FpMatrix::zeros(self.p, d, d)?;
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        m.set(i, j, a.get(i, j));
                    }
                }
                for i in 0..other.dim {
                    for j in 0..other.dim {
                        m.set(self.dim + i, self.dim + j, b.get(i, j));
                    }
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FpGModule { group: self.group.clone(), p: self.p, dim: d, actions })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c2() -> Arc<FiniteGroup> {
        Arc::new(FiniteGroup::cyclic(2).unwrap())
    }

    #[test]
    fn spin_regular_c2() {
        let n = FpGModule::regular(c2(), 2).unwrap();
        assert_eq!(n.spin(&[vec![1, 1]]).unwrap().rank(), 1);
        assert_eq!(n.spin(&[]).unwrap().rank(), 0);
        assert_eq!(n.spin(&[vec![1, 0]]).unwrap().rank(), 2);
    }

    #[test]
    fn radical_examples() {
        let n = FpGModule::regular(c2(), 2).unwrap();
        let rad = n.radical().unwrap();
        assert_eq!(rad.basis(), &[vec![1, 1]]);
        assert_eq!(FpGModule::regular(c2(), 3).unwrap().radical().unwrap().rank(), 0);
        assert_eq!(FpGModule::trivial(c2(), 2).unwrap().radical().unwrap().rank(), 0);
        let top = n.quotient(&rad).unwrap();
        assert_eq!(top.radical().unwrap().rank(), 0);
    }

    #[test]
    fn regular_is_cyclic() {
        for g in [FiniteGroup::cyclic(6).unwrap(), FiniteGroup::symmetric3().unwrap(), FiniteGroup::alternating4().unwrap()] {
            let g = Arc::new(g);
            for p in [2, 3, 5] {
                let n = FpGModule::regular(g.clone(), p).unwrap();
                assert_eq!(n.min_generators().unwrap(), 1);
                assert_eq!(n.minimal_generating_set().unwrap().len(), 1);
            }
        }
    }

    #[test]
    fn generating_sets_have_claimed_size() {
        let g = Arc::new(FiniteGroup::symmetric3().unwrap());
        for p in [2, 3, 5] {
            let reg = FpGModule::regular(g.clone(), p).unwrap();
            let n = reg.direct_sum(&reg).unwrap().direct_sum(&FpGModule::trivial(g.clone(), p).unwrap()).unwrap();
            let xs = n.minimal_generating_set().unwrap();
            assert_eq!(xs.len(), n.min_generators().unwrap());
            assert!(n.generates(&xs).unwrap());
        }
    }

    #[test]
    fn quotient_structure_examples() {
        let g = c2();
        let swap = IntMatrix::from_i64(&[vec![0, 1], vec![1, 0]], 2).unwrap();
        let m = ZGLattice::new(g.clone(), vec![swap]).unwrap();
        let basis = IntMatrix::identity(2).row_vecs();
        assert!(m.quotient_structure(&basis).unwrap().is_trivial());
        let q = m.quotient_structure(&[]).unwrap();
        assert_eq!(q.factors, vec![BigInt::zero(), BigInt::zero()]);
        assert_eq!(q.exponent(), None);
        // (1,1)ℤG + (1,-1)ℤG has index 2.
        let q = m.quotient_structure(&[vec![1.into(), 1.into()], vec![1.into(), (-1).into()]]).unwrap();
        assert_eq!(q.exponent(), Some(BigInt::from(2)));
        assert_eq!(ZGLattice::zero(g).d_rational().unwrap(), 0);
    }

    #[test]
    fn rejects_inconsistent_actions() {
        let bad = IntMatrix::from_i64(&[vec![2]], 1).unwrap();
        assert!(ZGLattice::new(c2(), vec![bad]).is_err());
    }
}
