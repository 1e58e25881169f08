use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactla::primes::{inv_mod, prime_divisors};
use crate::exactla::{hermite_basis, rref, smith_normal_form, EchelonBasis, FpMatrix, IntMatrix, Lattice};
use crate::groups::FiniteGroup;

use super::{element_actions, group_algebra, FpGModule};

/// Largest module order handled.
pub const MAX_ORDER: u64 = 1_000_000;

/// Isomorphism type of a simple ℤG-module: a prime and a simple component of 𝔽_pG/J.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CompositionFactor {
    pub p: u64,
    pub component: usize,
    pub dim: usize,
    pub trivial: bool,
}

/// A finite ℤG-module ℤ/m_1 ⊕ … ⊕ ℤ/m_k with right action matrices.
#[derive(Clone, Debug)]
pub struct FiniteZGModule {
    group: Arc<FiniteGroup>,
    moduli: Vec<u64>,
    actions: Vec<Vec<Vec<i64>>>,
}

/// A chain M = M_0 ⊃ M_1 ⊃ … ⊃ M_d = 0 with simple successive quotients.
#[derive(Clone, Debug, Serialize)]
pub struct Series {
    /// Orders |M_j|.
    pub orders: Vec<u64>,
    /// Type of M_j / M_{j+1}.
    pub factors: Vec<CompositionFactor>,
    #[serde(skip)]
    chain: Vec<Vec<Vec<BigInt>>>,
}

impl FiniteZGModule {
    pub fn new(group: Arc<FiniteGroup>, moduli: Vec<u64>, generator_actions: Vec<Vec<Vec<i64>>>) -> Result<Self> {
        let k = moduli.len();
        if moduli.iter().any(|&m| m < 2) {
            return Err(Error::InvalidGroup("cyclic summands must have order >= 2".into()));
        }
        let order = moduli.iter().try_fold(1u64, |acc, &m| acc.checked_mul(m).filter(|&o| o <= MAX_ORDER));
        if order.is_none() {
            return Err(Error::Unsupported(format!("module order exceeds {MAX_ORDER}")));
        }
        let reduce = |a: &[Vec<i64>]| -> Vec<Vec<i64>> {
            a.iter().map(|r| r.iter().zip(&moduli).map(|(&x, &m)| x.rem_euclid(m as i64)).collect()).collect()
        };
        let mut gens = Vec::with_capacity(generator_actions.len());
        for a in &generator_actions {
            if a.len() != k || a.iter().any(|r| r.len() != k) {
                return Err(Error::ShapeMismatch(format!("action matrices must be {k}x{k}")));
            }
            for i in 0..k {
                for j in 0..k {
                    if (moduli[i] as i64 * a[i][j]).rem_euclid(moduli[j] as i64) != 0 {
                        return Err(Error::InvalidGroup(format!("action entry ({i},{j}) is not compatible with the moduli")));
                    }
                }
            }
            gens.push(reduce(a));
        }
        let identity: Vec<Vec<i64>> = (0..k).map(|i| (0..k).map(|j| i64::from(i == j)).collect()).collect();
        let ms = moduli.clone();
        let actions = element_actions(&group, gens, identity, |a, b| {
            (0..k)
                .map(|i| (0..k).map(|j| (0..k).map(|t| a[i][t] * b[t][j]).sum::<i64>().rem_euclid(ms[j] as i64)).collect())
                .collect()
        })?;
        Ok(FiniteZGModule { group, moduli, actions })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn order(&self) -> u64 {
        self.moduli.iter().product()
    }

    fn rank(&self) -> usize {
        self.moduli.len()
    }

    fn base(&self) -> Vec<Vec<BigInt>> {
        (0..self.rank())
            .map(|i| (0..self.rank()).map(|j| if i == j { BigInt::from(self.moduli[i]) } else { BigInt::zero() }).collect())
            .collect()
    }

    fn full(&self) -> Vec<Vec<BigInt>> {
        IntMatrix::identity(self.rank()).row_vecs()
    }

    fn act(&self, x: &[BigInt], g: usize) -> Vec<BigInt> {
        let a = &self.actions[g];
        (0..self.rank()).map(|j| x.iter().zip(a).map(|(xi, row)| xi * row[j]).sum()).collect()
    }

    fn lattice_order(&self, gens: &[Vec<BigInt>]) -> Result<u64> {
        let q = Quot::new(gens, &self.base())?;
        q.order()
    }

    /// A composition series, built by repeatedly adding a simple submodule of the quotient.
    pub fn composition_series(&self) -> Result<Series> {
        let mut sub = self.base();
        let mut chain = vec![hermite_rows(&sub)];
        let mut factors = Vec::new();
        loop {
            let q = Quot::new(&self.full(), &sub)?;
            if q.order()? == 1 {
                break;
            }
            let p = q.d.iter().filter(|d| !d.is_one()).flat_map(|d| prime_divisors(d.to_u64().expect("small"))).min().expect("nontrivial");
            let (w, idx) = q.socle_layer(self, p)?;
            let s = find_simple_submodule(&w)?;
            let sm = w.submodule(&basis_of(&s, w.p(), w.dim()))?;
            let f = identify_simple(&sm)?.ok_or_else(|| Error::Internal("extracted submodule is not simple".into()))?;
            for v in &s {
                let mut y = vec![BigInt::zero(); q.d.len()];
                for (t, &i) in idx.iter().enumerate() {
                    y[i] = BigInt::from(v[t]) * (&q.d[i] / BigInt::from(p));
                }
                sub.push(q.lift(&y)?);
            }
            sub = hermite_rows(&sub);
            chain.push(sub.clone());
            factors.push(f);
        }
        chain.reverse();
        factors.reverse();
        let orders = chain.iter().map(|c| self.lattice_order(c)).collect::<Result<Vec<_>>>()?;
        let mut chain_full = chain;
        chain_full[0] = hermite_rows(&self.full());
        Ok(Series { orders, factors, chain: chain_full })
    }

    /// A chain whose successive quotients follow `target`, for modules of order prime to |G|.
    pub fn reorder_series(&self, target: &[CompositionFactor]) -> Result<Series> {
        let bad: BTreeSet<u64> = prime_divisors(self.order()).intersection(&self.group.primes()).copied().collect();
        if !bad.is_empty() {
            return Err(Error::Hypothesis(format!("module has p-torsion for p in pi(G): {bad:?}")));
        }
        let cs = self.composition_series()?;
        let key = |f: &CompositionFactor| (f.p, f.component);
        let mut have: Vec<_> = cs.factors.iter().map(key).collect();
        let mut want: Vec<_> = target.iter().map(key).collect();
        have.sort_unstable();
        want.sort_unstable();
        if have != want {
            return Err(Error::InvalidTarget("target is not a permutation of the composition factors".into()));
        }
        let mut cur = hermite_rows(&self.full());
        let mut chain = vec![cur.clone()];
        for t in target {
            let p = t.p;
            let q = Quot::new(&cur, &self.base())?;
            let (v, idx) = q.top_layer(self, p)?;
            let alg = group_algebra(&self.group, p)?;
            let e = &alg.blocks()[t.component].idempotent;
            let mut part = EchelonBasis::new(p, v.dim());
            for i in 0..v.dim() {
                let mut x = vec![0u64; v.dim()];
                x[i] = 1;
                part.insert(&v.act_algebra(&x, e));
            }
            if part.rank() == 0 {
                return Err(Error::Internal("requested factor does not occur in the top layer".into()));
            }
            let pm = v.submodule(&part)?;
            let s_local = find_simple_submodule(&pm)?;
            let s: Vec<Vec<u64>> = s_local.iter().map(|c| combine(c, part.basis(), p)).collect();
            let kernel = invariant_complement(&v, &s)?;
            let mut gens = self.base();
            gens.extend(cur.iter().map(|r| r.iter().map(|x| x * BigInt::from(p)).collect::<Vec<_>>()));
            for kv in &kernel {
                let mut y = vec![BigInt::zero(); q.d.len()];
                for (t, &i) in idx.iter().enumerate() {
                    y[i] = BigInt::from(kv[t]);
                }
                gens.push(q.lift(&y)?);
            }
            cur = hermite_rows(&gens);
            chain.push(cur.clone());
        }
        let orders = chain.iter().map(|c| self.lattice_order(c)).collect::<Result<Vec<_>>>()?;
        if orders.last() != Some(&1) {
            return Err(Error::Internal("reordered chain does not end at 0".into()));
        }
        Ok(Series { orders, factors: target.to_vec(), chain })
    }

    /// Checks that orders strictly decrease and each quotient has the recorded type.
    pub fn verify_series(&self, s: &Series) -> Result<bool> {
        if s.orders.first() != Some(&self.order()) || s.orders.last() != Some(&1) || s.chain.len() != s.factors.len() + 1 {
            return Ok(false);
        }
        if s.orders.windows(2).any(|w| w[0] <= w[1]) {
            return Ok(false);
        }
        for (j, f) in s.factors.iter().enumerate() {
            let q = Quot::new(&s.chain[j], &s.chain[j + 1])?;
            if q.order()? != f.p.pow(f.dim as u32) {
                return Ok(false);
            }
            let (v, _) = q.top_layer(self, f.p)?;
            match identify_simple(&v)? {
                Some(g) if (g.p, g.component) == (f.p, f.component) => {}
                _ => return Ok(false),
            }
        }
        Ok(true)
    }
}

fn hermite_rows(gens: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let k = gens.first().map_or(0, Vec::len);
    hermite_basis(&IntMatrix::from_rows(gens.to_vec(), k).expect("shape")).row_vecs()
}

fn combine(coeffs: &[u64], rows: &[Vec<u64>], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; rows.first().map_or(0, Vec::len)];
    for (c, r) in coeffs.iter().zip(rows) {
        for (o, x) in out.iter_mut().zip(r) {
            *o = (*o + c * x) % p;
        }
    }
    out
}

fn basis_of(vs: &[Vec<u64>], p: u64, dim: usize) -> EchelonBasis {
    let mut b = EchelonBasis::new(p, dim);
    for v in vs {
        b.insert(v);
    }
    b
}

/// A/B for G-stable lattices B ⊆ A of full rank, in Smith coordinates.
struct Quot {
    a: IntMatrix,
    a_lattice: Lattice,
    v: IntMatrix,
    v_inv: IntMatrix,
    d: Vec<BigInt>,
}

impl Quot {
    fn new(a_gens: &[Vec<BigInt>], b_gens: &[Vec<BigInt>]) -> Result<Self> {
        let k = a_gens.first().map_or(0, Vec::len);
        let a = hermite_basis(&IntMatrix::from_rows(a_gens.to_vec(), k)?);
        let a_lattice = Lattice::from_generators(a.row_vecs(), k);
        let b = hermite_basis(&IntMatrix::from_rows(b_gens.to_vec(), k)?);
        let rows = b
            .row_vecs()
            .iter()
            .map(|r| a_lattice.coords(r).ok_or_else(|| Error::Internal("sublattice is not contained in lattice".into())))
            .collect::<Result<Vec<_>>>()?;
        let snf = smith_normal_form(&IntMatrix::from_rows(rows, a.rows())?);
        let v_inv = snf.v.inverse_unimodular()?;
        Ok(Quot { a, a_lattice, v: snf.v, v_inv, d: snf.factors })
    }

    fn order(&self) -> Result<u64> {
        let o = self.d.iter().fold(BigInt::one(), |acc, x| acc * x);
        o.to_u64().filter(|&o| o > 0).ok_or_else(|| Error::Internal("quotient is not finite".into()))
    }

    fn coords(&self, x: &[BigInt]) -> Result<Vec<BigInt>> {
        let c = self.a_lattice.coords(x).ok_or_else(|| Error::Internal("vector outside lattice".into()))?;
        Ok(self.v.apply(&c).into_iter().zip(&self.d).map(|(y, d)| if d.is_zero() { y } else { y.mod_floor(d) }).collect())
    }

    fn lift(&self, y: &[BigInt]) -> Result<Vec<BigInt>> {
        Ok(self.a.apply(&self.v_inv.apply(y)))
    }

    /// (A/B)/p(A/B) as an 𝔽_pG-module on the Smith coordinates divisible by p.
    fn top_layer(&self, m: &FiniteZGModule, p: u64) -> Result<(FpGModule, Vec<usize>)> {
        let pb = BigInt::from(p);
        let idx: Vec<usize> = (0..self.d.len()).filter(|&i| self.d[i].is_multiple_of(&pb)).collect();
        let gens = m
            .group
            .generators()
            .iter()
            .map(|&g| {
                let rows = idx
                    .iter()
                    .map(|&i| {
                        let mut y = vec![BigInt::zero(); self.d.len()];
                        y[i] = BigInt::one();
                        let img = self.coords(&m.act(&self.lift(&y)?, g))?;
                        Ok(idx.iter().map(|&j| img[j].mod_floor(&pb).to_u64().expect("residue")).collect())
                    })
                    .collect::<Result<Vec<Vec<u64>>>>()?;
                FpMatrix::from_residue_rows(p, idx.len(), rows)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((FpGModule::new(m.group.clone(), p, idx.len(), gens)?, idx))
    }

    /// Elements of A/B killed by p, on the basis (d_i/p)·e_i.
    fn socle_layer(&self, m: &FiniteZGModule, p: u64) -> Result<(FpGModule, Vec<usize>)> {
        let pb = BigInt::from(p);
        let idx: Vec<usize> = (0..self.d.len()).filter(|&i| self.d[i].is_multiple_of(&pb)).collect();
        let gens = m
            .group
            .generators()
            .iter()
            .map(|&g| {
                let rows = idx
                    .iter()
                    .map(|&i| {
                        let mut y = vec![BigInt::zero(); self.d.len()];
                        y[i] = &self.d[i] / &pb;
                        let img = self.coords(&m.act(&self.lift(&y)?, g))?;
                        idx.iter()
                            .map(|&j| {
                                let step = &self.d[j] / &pb;
                                if !img[j].is_multiple_of(&step) {
                                    return Err(Error::Internal("p-torsion is not action-stable".into()));
                                }
                                Ok((&img[j] / step).mod_floor(&pb).to_u64().expect("residue"))
                            })
                            .collect::<Result<Vec<u64>>>()
                    })
                    .collect::<Result<Vec<Vec<u64>>>>()?;
                FpMatrix::from_residue_rows(p, idx.len(), rows)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((FpGModule::new(m.group.clone(), p, idx.len(), gens)?, idx))
    }
}

/// The simple component of a simple module, or `None` if the module is not simple.
pub fn identify_simple(s: &FpGModule) -> Result<Option<CompositionFactor>> {
    if s.dim() == 0 || s.radical()?.rank() != 0 {
        return Ok(None);
    }
    let alg = group_algebra(s.group(), s.p())?;
    let active = active_components(s)?;
    match active.as_slice() {
        [i] if alg.blocks()[*i].simple_dim == s.dim() => {
            let b = &alg.blocks()[*i];
            Ok(Some(CompositionFactor { p: s.p(), component: *i, dim: b.simple_dim, trivial: b.trivial }))
        }
        _ => Ok(None),
    }
}

fn active_components(s: &FpGModule) -> Result<Vec<usize>> {
    let alg = group_algebra(s.group(), s.p())?;
    let mut out = Vec::new();
    for (i, b) in alg.blocks().iter().enumerate() {
        let acts = (0..s.dim()).any(|e| {
            let mut v = vec![0u64; s.dim()];
            v[e] = 1;
            s.act_algebra(&v, &b.idempotent).iter().any(|&x| x != 0)
        });
        if acts {
            out.push(i);
        }
    }
    Ok(out)
}

/// Basis (in the module's coordinates) of some simple submodule.
pub fn find_simple_submodule(w: &FpGModule) -> Result<Vec<Vec<u64>>> {
    if w.dim() == 0 {
        return Err(Error::Internal("zero module has no simple submodule".into()));
    }
    let p = w.p();
    let mut cur = w.clone();
    let mut emb: Vec<Vec<u64>> = (0..w.dim()).map(|i| (0..w.dim()).map(|j| u64::from(i == j)).collect()).collect();
    loop {
        let rad = cur.radical()?;
        let sub = if rad.rank() > 0 {
            rad
        } else {
            let alg = group_algebra(cur.group(), p)?;
            let active = active_components(&cur)?;
            if active.len() > 1 {
                let e = &alg.blocks()[active[0]].idempotent;
                let mut b = EchelonBasis::new(p, cur.dim());
                for i in 0..cur.dim() {
                    let mut v = vec![0u64; cur.dim()];
                    v[i] = 1;
                    b.insert(&cur.act_algebra(&v, e));
                }
                b
            } else if alg.blocks()[active[0]].simple_dim == cur.dim() {
                return Ok(emb);
            } else {
                let mut first = vec![0u64; cur.dim()];
                first[0] = 1;
                let s = cur.spin(&[first])?;
                if s.rank() < cur.dim() {
                    s
                } else {
                    singular_endomorphism_image(&cur)?
                }
            }
        };
        let next = cur.submodule(&sub)?;
        emb = sub.basis().iter().map(|b| combine(b, &emb, p)).collect();
        cur = next;
    }
}

/// Image of a nonzero, non-invertible G-endomorphism of an isotypic non-simple module.
fn singular_endomorphism_image(u: &FpGModule) -> Result<EchelonBasis> {
    let p = u.p();
    let n = u.dim();
    let gens = u.group().generators().to_vec();
    let mut rows = vec![vec![0u64; n * n * gens.len()]; n * n];
    for (gi, &g) in gens.iter().enumerate() {
        let m = u.action(g);
        for i in 0..n {
            for j in 0..n {
                let col = gi * n * n + i * n + j;
                for t in 0..n {
                    rows[i * n + t][col] = (rows[i * n + t][col] + m.get(t, j)) % p;
                    rows[t * n + j][col] = (rows[t * n + j][col] + p - m.get(i, t)) % p;
                }
            }
        }
    }
    let kernel = rref(&FpMatrix::from_residue_rows(p, n * n * gens.len(), rows)?.transpose()).kernel.row_vecs();
    let as_matrix = |v: &[u64]| FpMatrix::from_residue_rows(p, n, v.chunks(n).map(<[u64]>::to_vec).collect()).expect("shape");
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let candidates = kernel.iter().cloned().chain((0..2000).map(|_| {
        let coeffs: Vec<u64> = (0..kernel.len()).map(|_| rng.gen_range(0..p)).collect();
        combine(&coeffs, &kernel, p)
    }));
    for c in candidates {
        let r = rref(&as_matrix(&c));
        if r.rank > 0 && r.rank < n {
            return Ok(basis_of(&r.row_basis.row_vecs(), p, n));
        }
    }
    Err(Error::Internal("no singular endomorphism found".into()))
}

/// Kernel of the G-averaged projection onto `s`, a G-stable complement when p ∤ |G|.
fn invariant_complement(v: &FpGModule, s: &[Vec<u64>]) -> Result<Vec<Vec<u64>>> {
    let p = v.p();
    let n = v.dim();
    let group = v.group().clone();
    let mut full = basis_of(s, p, n);
    let s_rows = full.basis().to_vec();
    let mut extra = Vec::new();
    for i in 0..n {
        let mut e = vec![0u64; n];
        e[i] = 1;
        if full.insert(&e) {
            extra.push(e);
        }
    }
    // Projection P0 onto span(s) along span(extra): solve e_i = c·[s_rows; extra].
    let mut basis_rows = s_rows.clone();
    basis_rows.extend(extra);
    let bmat = FpMatrix::from_residue_rows(p, n, basis_rows)?;
    let mut p0_rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = vec![0u64; n];
        e[i] = 1;
        let c = crate::exactla::solve_mod_p(&bmat, &e)?.ok_or_else(|| Error::Internal("basis is singular".into()))?;
        p0_rows.push(combine(&c[..s_rows.len()], &s_rows, p));
    }
    let p0 = FpMatrix::from_residue_rows(p, n, p0_rows)?;
    let mut avg = FpMatrix::zeros(p, n, n)?;
    for g in 0..group.order() {
        let term = v.action(group.inv(g)).mul(&p0)?.mul(v.action(g))?;
        for i in 0..n {
            for j in 0..n {
                avg.set(i, j, (avg.get(i, j) + term.get(i, j)) % p);
            }
        }
    }
    let inv = inv_mod((group.order() as u64 % p) as i128, p as i128).ok_or_else(|| Error::Hypothesis("p divides |G|".into()))? as u64;
    for i in 0..n {
        for j in 0..n {
            avg.set(i, j, avg.get(i, j) * inv % p);
        }
    }
    Ok(rref(&avg.transpose()).kernel.row_vecs())
}
