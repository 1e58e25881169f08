//! Canonical lattices: augmentation ideals, relation modules, resolution kernels.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exactla::primes::{inv_mod, prime_divisors, smallest_prime_outside};
use crate::exactla::{hermite_basis, integer_kernel, IntMatrix, Lattice};
use crate::gmodule::ZGLattice;
use crate::gring::{fox_derivative_right, GroupRingElement};
use crate::groups::{any_combination, FiniteGroup, Presentation};

/// ΔG with basis {g − 1 : g ≠ 1}.
pub fn augmentation_lattice(group: &Arc<FiniteGroup>) -> Result<ZGLattice> {
    let n = group.order();
    if n == 1 {
        return Ok(ZGLattice::zero(group.clone()));
    }
    let actions = group
        .generators()
        .iter()
        .map(|&h| {
            let mut m = IntMatrix::zeros(n - 1, n - 1);
            for g in 1..n {
                // (g − 1)h = (gh − 1) − (h − 1)
                let gh = group.mul(g, h);
                if gh != 0 {
                    m.set(g - 1, gh - 1, m.get(g - 1, gh - 1) + 1);
                }
                if h != 0 {
                    m.set(g - 1, h - 1, m.get(g - 1, h - 1) - 1);
                }
            }
            m
        })
        .collect();
    ZGLattice::new(group.clone(), actions)
}

/// Coordinates of an augmentation-zero element in the basis of ΔG.
pub fn delta_coords(x: &GroupRingElement) -> Result<Vec<BigInt>> {
    if !x.augment().is_zero() {
        return Err(Error::InvalidResolution("element is not in the augmentation ideal".into()));
    }
    Ok(x.coeffs()[1..].to_vec())
}

/// Action of G on ℤG^e by right multiplication, coordinates indexed by (slot, element).
fn free_action(group: &FiniteGroup, e: usize, h: usize) -> IntMatrix {
    let n = group.order();
    let mut m = IntMatrix::zeros(e * n, e * n);
    for i in 0..e {
        for g in 0..n {
            m.set(i * n + g, i * n + group.mul(g, h), BigInt::one());
        }
    }
    m
}

/// The G-stable saturated sublattice of ℤG^e spanned by `basis`, with induced action.
fn sublattice(group: &Arc<FiniteGroup>, e: usize, basis: &IntMatrix) -> Result<ZGLattice> {
    if basis.rows() == 0 {
        return Ok(ZGLattice::zero(group.clone()));
    }
    let lat = Lattice::from_generators(basis.row_vecs(), basis.cols());
    let actions = group
        .generators()
        .iter()
        .map(|&h| {
            let act = free_action(group, e, h);
            let rows = basis
                .row_vecs()
                .iter()
                .map(|r| lat.coords(&act.apply(r)).ok_or_else(|| Error::Internal("kernel is not G-stable".into())))
                .collect::<Result<Vec<_>>>()?;
            IntMatrix::from_rows(rows, basis.rows())
        })
        .collect::<Result<Vec<_>>>()?;
    ZGLattice::new(group.clone(), actions)
}

/// Integer matrix of the G-map ℤG^e → ℤG^f (or ΔG) whose slot i maps to `rows[i]`.
fn expand(group: &FiniteGroup, rows: &[Vec<GroupRingElement>], into_delta: bool) -> Result<IntMatrix> {
    let n = group.order();
    let f = rows.first().map_or(0, Vec::len);
    let cols = if into_delta { n - 1 } else { f * n };
    let mut out = Vec::with_capacity(rows.len() * n);
    for row in rows {
        for g in 0..n {
            let gring = GroupRingElement::element(row[0].group().clone(), g);
            let mut v = Vec::with_capacity(cols);
            for x in row {
                let y = x.mul(&gring)?;
                if into_delta {
                    v.extend(delta_coords(&y)?);
                } else {
                    v.extend(y.coeffs().iter().cloned());
                }
            }
            out.push(v);
        }
    }
    IntMatrix::from_rows(out, cols)
}

/// The relation module of a presentation, realized as ker(ℤG^d → ΔG, e_x ↦ x̄ − 1).
#[derive(Clone, Debug)]
pub struct RelationLattice {
    pub lattice: ZGLattice,
    pub presentation: Presentation,
    /// Rows: lattice basis inside ℤG^d.
    pub embedding: IntMatrix,
}

impl RelationLattice {
    /// Right Fox derivatives of each relator, as vectors in ℤG^d.
    pub fn relator_vectors(&self) -> Result<Vec<Vec<BigInt>>> {
        let p = &self.presentation;
        let group = p.target();
        let images: Vec<(usize, i64)> = p.images().iter().map(|&g| (g, 0)).collect();
        p.relators()
            .iter()
            .map(|w| {
                let mut v = Vec::with_capacity(p.rank() * group.order());
                for x in 0..p.rank() {
                    let d = fox_derivative_right(w, x, group, &images)?;
                    v.extend((0..group.order()).map(|g| d.coefficient(g, 0)));
                }
                Ok(v)
            })
            .collect()
    }

    /// Relator images in lattice coordinates.
    pub fn relator_coords(&self) -> Result<Vec<Vec<BigInt>>> {
        self.relator_vectors()?
            .iter()
            .map(|v| self.coords(v).ok_or_else(|| Error::Internal("relator Fox image lies outside the kernel".into())))
            .collect()
    }

    /// Coordinates of `v ∈ ℤG^d` in the lattice basis, if it lies in the lattice.
    pub fn coords(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        Lattice::from_generators(self.embedding.row_vecs(), self.embedding.cols()).coords(v)
    }
}

pub fn relation_lattice(p: &Presentation) -> Result<RelationLattice> {
    let group = p.target().clone();
    let rows: Vec<Vec<GroupRingElement>> = p
        .images()
        .iter()
        .map(|&x| Ok(vec![GroupRingElement::element(group.clone(), x).sub(&GroupRingElement::one(group.clone()))?]))
        .collect::<Result<_>>()?;
    let map = if group.order() == 1 {
        IntMatrix::zeros(p.rank(), 0)
    } else {
        expand(&group, &rows, true)?
    };
    let embedding = integer_kernel(&map);
    let lattice = sublattice(&group, p.rank(), &embedding)?;
    let out = RelationLattice { lattice, presentation: p.clone(), embedding };
    for v in out.relator_vectors()? {
        if out.coords(&v).is_none() {
            return Err(Error::Internal("relator Fox image lies outside the kernel".into()));
        }
    }
    Ok(out)
}

/// A partial free resolution ⋯ → ℤG^{e_2} → ℤG^{e_1} → ΔG → 0 given by boundary rows.
#[derive(Clone, Debug)]
pub struct ResolutionSpec {
    group: Arc<FiniteGroup>,
    /// boundaries[s-1][i][j]: image of the i-th basis vector of stage s in slot j of stage s−1.
    boundaries: Vec<Vec<Vec<GroupRingElement>>>,
    /// Known period of the resolution, if any.
    pub period: Option<usize>,
}

impl ResolutionSpec {
    pub fn new(group: Arc<FiniteGroup>, boundaries: Vec<Vec<Vec<GroupRingElement>>>, period: Option<usize>) -> Result<Self> {
        for (s, b) in boundaries.iter().enumerate() {
            let width = if s == 0 { 1 } else { boundaries[s - 1].len() };
            if b.is_empty() || b.iter().any(|r| r.len() != width) {
                return Err(Error::InvalidResolution(format!("boundary {} has the wrong shape", s + 1)));
            }
        }
        let spec = ResolutionSpec { group, boundaries, period };
        for s in 1..spec.boundaries.len() {
            let prod = spec.matrix(s + 1)?.mul(&spec.matrix(s)?)?;
            if !prod.is_zero() {
                return Err(Error::InvalidResolution(format!("boundaries {} and {s} do not compose to zero", s + 1)));
            }
        }
        Ok(spec)
    }

    /// The periodic resolution of ℤ over ℤC_n, alternating a − 1 and Ĝ.
    pub fn periodic_cyclic(n: u64, stages: usize) -> Result<Self> {
        let group = Arc::new(FiniteGroup::cyclic(n)?);
        let a = GroupRingElement::element(group.clone(), group.generators()[0]);
        let am1 = a.sub(&GroupRingElement::one(group.clone()))?;
        let ghat = GroupRingElement::ghat(group.clone());
        let boundaries = (1..=stages).map(|s| vec![vec![if s % 2 == 1 { am1.clone() } else { ghat.clone() }]]).collect();
        Self::new(group, boundaries, Some(2))
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn stages(&self) -> usize {
        self.boundaries.len()
    }

    /// Free ranks e_1, e_2, ….
    pub fn ranks(&self) -> Vec<usize> {
        self.boundaries.iter().map(Vec::len).collect()
    }

    fn matrix(&self, s: usize) -> Result<IntMatrix> {
        expand(&self.group, &self.boundaries[s - 1], s == 1)
    }

    fn image(&self, s: usize) -> Result<IntMatrix> {
        Ok(hermite_basis(&self.matrix(s)?))
    }
}

/// ker θ_s with its induced action, after checking exactness at stages below s.
pub fn resolution_kernel(spec: &ResolutionSpec, s: usize) -> Result<ZGLattice> {
    if s == 0 || s > spec.stages() {
        return Err(Error::InvalidResolution(format!("stage {s} outside 1..={}", spec.stages())));
    }
    let n = spec.group.order();
    if hermite_basis(&spec.matrix(1)?).row_vecs() != IntMatrix::identity(n - 1).row_vecs() {
        return Err(Error::InvalidResolution("first boundary does not map onto the augmentation ideal".into()));
    }
    for j in 1..s {
        let ker = integer_kernel(&spec.matrix(j)?);
        if hermite_basis(&ker).row_vecs() != spec.image(j + 1)?.row_vecs() {
            return Err(Error::InvalidResolution(format!("sequence is not exact at stage {j}")));
        }
    }
    let ker = integer_kernel(&spec.matrix(s)?);
    sublattice(&spec.group, spec.ranks()[s - 1], &ker)
}

/// f_s − f_{s−1} + ⋯ ± f_1 + δ_s, with δ_s = 1 for even s.
pub fn kernel_rational_count(ranks: &[usize], s: usize) -> i64 {
    let alt: i64 = (1..=s).map(|j| if (s - j) % 2 == 0 { ranks[j - 1] as i64 } else { -(ranks[j - 1] as i64) }).sum();
    alt + i64::from(s % 2 == 0)
}

/// Smallest prime outside π(G) ∪ π(torsion).
pub fn good_prime(group: &FiniteGroup, torsion_primes: &BTreeSet<u64>) -> u64 {
    let mut bad = group.primes();
    bad.extend(torsion_primes);
    smallest_prime_outside(&bad)
}

/// A prime p with an explicit X, |X| = d_G(M/pM), generating M over ℤG.
#[derive(Clone, Debug)]
pub struct SwanWitness {
    pub p: u64,
    pub generators: Vec<Vec<BigInt>>,
}

/// x_k = Σ_q P_q·m_q·y_{q,k} with P_q = Π_{r≠q} r and P_q·m_q ≡ 1 mod q, so x_k ≡ y_{q,k} mod q.
/// Shorter sets are padded with zeros.
pub fn crt_combine(sets: &[(u64, Vec<Vec<u64>>)], size: usize, dim: usize) -> Vec<Vec<BigInt>> {
    let mut out = vec![vec![BigInt::zero(); dim]; size];
    for (q, ys) in sets {
        let others: u64 = sets.iter().filter(|(r, _)| r != q).map(|(r, _)| *r).product();
        let m = inv_mod((others % q) as i128, *q as i128).expect("distinct primes") as u64;
        let w = BigInt::from(others) * BigInt::from(m);
        for (x, y) in out.iter_mut().zip(ys) {
            for (xi, yi) in x.iter_mut().zip(y) {
                *xi += &w * BigInt::from(*yi);
            }
        }
    }
    out
}

/// Bounded search for a Swan witness; `None` means undecided.
///
/// Candidates are tried in order: subsets of `hints` followed by lattice basis vectors, then
/// CRT combinations of minimal generating sets over the primes met in the quotient exponent.
pub fn swan_witness(m: &ZGLattice, hints: &[Vec<BigInt>], budget: usize) -> Result<Option<SwanWitness>> {
    if m.rank() == 0 {
        return Ok(Some(SwanWitness { p: 2, generators: vec![] }));
    }
    let mut primes: Vec<u64> = m.group().primes().into_iter().collect();
    if primes.is_empty() {
        primes.push(2);
    }
    let counts = primes.iter().map(|&p| m.reduce_mod(p)?.min_generators()).collect::<Result<Vec<_>>>()?;
    let top = counts.iter().copied().max().unwrap_or(0).max(m.d_rational()?);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for (&p, &d) in primes.iter().zip(&counts) {
        if d != top {
            continue;
        }
        let mut pool: Vec<Vec<BigInt>> = hints.to_vec();
        pool.extend(IntMatrix::identity(m.rank()).row_vecs());
        let modp = m.reduce_mod(p)?;
        let idx: Vec<usize> = (0..pool.len()).collect();
        let mut found = None;
        let mut tried = 0usize;
        let mut failure = None;
        any_combination(&idx, d, &mut |c| {
            tried += 1;
            if tried > budget {
                return true;
            }
            let xs: Vec<Vec<BigInt>> = c.iter().map(|&i| pool[i].clone()).collect();
            let residues: Vec<Vec<u64>> = xs.iter().map(|x| x.iter().map(|v| v.mod_floor(&BigInt::from(p)).to_u64().expect("residue")).collect()).collect();
            let check = modp.generates(&residues).and_then(|ok| if ok { m.quotient_structure(&xs).map(|q| q.is_trivial()) } else { Ok(false) });
            match check {
                Ok(true) => {
                    found = Some(xs);
                    true
                }
                Ok(false) => false,
                Err(e) => {
                    failure = Some(e);
                    true
                }
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        if let Some(xs) = found {
            return Ok(Some(SwanWitness { p, generators: xs }));
        }
        let mut sets = vec![(p, modp.minimal_generating_set()?)];
        let mut attempts = 0;
        while attempts <= budget {
            let base = crt_combine(&sets, d, m.rank());
            let modulus: u64 = sets.iter().map(|(q, _)| q).product();
            let mut grew = false;
            while attempts <= budget && !grew {
                let xs: Vec<Vec<BigInt>> = if attempts == 0 {
                    base.clone()
                } else {
                    base.iter().map(|v| v.iter().map(|x| x + BigInt::from(modulus as i64 * rng.gen_range(-2i64..=2))).collect()).collect()
                };
                attempts += 1;
                let qs = m.quotient_structure(&xs)?;
                if qs.is_trivial() {
                    return Ok(Some(SwanWitness { p, generators: xs }));
                }
                let Some(e) = qs.exponent().and_then(|e| e.to_u64()) else { continue };
                for q in prime_divisors(e) {
                    if sets.iter().all(|(r, _)| *r != q) {
                        sets.push((q, m.reduce_mod(q)?.minimal_generating_set()?));
                        grew = true;
                    }
                }
            }
        }
    }
    Ok(None)
}
