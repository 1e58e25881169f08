use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::exactla::primes::inv_mod;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exactla::{check_prime, rref, solve_mod_p, EchelonBasis, FpMatrix};
use crate::groups::FiniteGroup;

/// A simple component of 𝔽_pG/J: its central primitive idempotent and dim(Ā·e).
#[derive(Clone, Debug)]
pub struct Block {
    pub idempotent: Vec<u64>,
    pub dim: usize,
    /// Dimension of the simple module belonging to this component.
    pub simple_dim: usize,
    /// Whether the trivial module belongs to this component.
    pub trivial: bool,
}

/// Structure of 𝔽_pG needed for generator counts: Jacobson radical and simple components of the top.
#[derive(Debug)]
pub struct GroupAlgebra {
    group: Arc<FiniteGroup>,
    p: u64,
    radical: EchelonBasis,
    blocks: Vec<Block>,
}

fn cache() -> &'static Mutex<HashMap<(String, u64), Arc<GroupAlgebra>>> {
    static CACHE: OnceLock<Mutex<HashMap<(String, u64), Arc<GroupAlgebra>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Cached structure of 𝔽_pG.
pub fn group_algebra(group: &Arc<FiniteGroup>, p: u64) -> Result<Arc<GroupAlgebra>> {
    check_prime(p)?;
    let key = (group.fingerprint(), p);
    if let Some(a) = cache().lock().expect("cache lock").get(&key) {
        return Ok(a.clone());
    }
    let a = Arc::new(GroupAlgebra::compute(group.clone(), p)?);
    cache().lock().expect("cache lock").insert(key, a.clone());
    Ok(a)
}

impl GroupAlgebra {
    fn compute(group: Arc<FiniteGroup>, p: u64) -> Result<Self> {
        let mut alg = GroupAlgebra { radical: EchelonBasis::new(p, group.order()), blocks: vec![], group, p };
        alg.radical = alg.compute_radical()?;
        alg.blocks = alg.compute_blocks()?;
        Ok(alg)
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }
    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn radical(&self) -> &EchelonBasis {
        &self.radical
    }
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Product in (ℤ/m)G.
    pub fn mul_mod(&self, x: &[u64], y: &[u64], m: u64) -> Vec<u64> {
        let g = &self.group;
        let mut out = vec![0u128; g.order()];
        for (a, &u) in x.iter().enumerate() {
            if u == 0 {
                continue;
            }
            for (b, &v) in y.iter().enumerate() {
                if v != 0 {
                    let k = g.mul(a, b);
                    out[k] = (out[k] + u as u128 * v as u128) % m as u128;
                }
            }
        }
        out.into_iter().map(|v| v as u64).collect()
    }

    pub fn mul(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        self.mul_mod(x, y, self.p)
    }

    fn pow_mod(&self, x: &[u64], mut k: u64, m: u64) -> Vec<u64> {
        let mut result = self.unit();
        let mut base = x.to_vec();
        while k > 0 {
            if k & 1 == 1 {
                result = self.mul_mod(&result, &base, m);
            }
            base = self.mul_mod(&base, &base, m);
            k >>= 1;
        }
        result
    }

    fn unit(&self) -> Vec<u64> {
        let mut e = vec![0u64; self.group.order()];
        e[0] = 1;
        e
    }

    fn element(&self, g: usize) -> Vec<u64> {
        let mut e = vec![0u64; self.group.order()];
        e[g] = 1;
        e
    }

    /// Radical by Frobenius trace layers: I_i = {x ∈ I_{i−1} : g_i(xy) = 0 for all y}, where
    /// g_i(x) = (Tr(x̃^{pⁱ}) mod p^{i+1}) / pⁱ in the regular representation; J = I_l, l = ⌊log_p |G|⌋.
    fn compute_radical(&self) -> Result<EchelonBasis> {
        let n = self.group.order();
        let p = self.p;
        if n as u64 % p != 0 {
            return Ok(EchelonBasis::new(p, n));
        }
        let mut l = 0u32;
        while p.pow(l + 1) <= n as u64 {
            l += 1;
        }
        let mut layer: Vec<Vec<u64>> = (0..n).map(|g| self.element(g)).collect();
        for i in 0..=l {
            let pi = p.pow(i);
            let q = pi * p;
            let mut rows = Vec::with_capacity(layer.len());
            for u in &layer {
                let mut row = Vec::with_capacity(n);
                for b in 0..n {
                    let ub = self.mul_mod(u, &self.element(b), q);
                    let w = self.pow_mod(&ub, pi, q);
                    let trace = (n as u128 * w[0] as u128 % q as u128) as u64;
                    if trace % pi != 0 {
                        return Err(Error::Internal(format!("trace layer {i} not divisible by {pi}")));
                    }
                    row.push(trace / pi);
                }
                rows.push(row);
            }
            let m = FpMatrix::from_residue_rows(p, n, rows)?;
            let kernel = rref(&m.transpose()).kernel;
            let mut next = Vec::new();
            for k in kernel.row_vecs() {
                let mut v = vec![0u64; n];
                for (coef, u) in k.iter().zip(&layer) {
                    if *coef != 0 {
                        for (x, y) in v.iter_mut().zip(u) {
                            *x = (*x + coef * y) % p;
                        }
                    }
                }
                next.push(v);
            }
            layer = next;
        }
        let mut basis = EchelonBasis::new(p, n);
        for v in &layer {
            basis.insert(v);
        }
        Ok(basis)
    }

    /// Canonical representative of x + J.
    pub fn canonical(&self, x: &[u64]) -> Vec<u64> {
        self.radical.reduce(x)
    }

    fn compute_blocks(&self) -> Result<Vec<Block>> {
        let n = self.group.order();
        let p = self.p;
        let gens = self.group.generators();
        // Z(A/J): x with [x, g] ∈ J for every generator g.
        let mut rows = Vec::with_capacity(n);
        for h in 0..n {
            let x = self.element(h);
            let mut row = Vec::with_capacity(n * gens.len());
            for &g in gens {
                let xg = self.mul(&x, &self.element(g));
                let gx = self.mul(&self.element(g), &x);
                let d: Vec<u64> = xg.iter().zip(&gx).map(|(a, b)| (a + p - b) % p).collect();
                row.extend(self.canonical(&d));
            }
            rows.push(row);
        }
        let center_kernel = if gens.is_empty() {
            FpMatrix::identity(p, n)?
        } else {
            rref(&FpMatrix::from_residue_rows(p, n * gens.len(), rows)?.transpose()).kernel
        };
        let mut center = EchelonBasis::new(p, n);
        for z in center_kernel.row_vecs() {
            center.insert(&self.canonical(&z));
        }
        // Berlekamp subalgebra {z : z^p = z}, spanned by the block idempotents.
        let zb = center.basis().to_vec();
        let frob_rows: Vec<Vec<u64>> = zb
            .iter()
            .map(|z| {
                let zp = self.canonical(&self.pow_mod(z, p, p));
                zp.iter().zip(z).map(|(a, b)| (a + p - b) % p).collect()
            })
            .collect();
        let fixed = if zb.is_empty() {
            vec![]
        } else {
            rref(&FpMatrix::from_residue_rows(p, n, frob_rows)?.transpose()).kernel.row_vecs()
        };
        let berlekamp: Vec<Vec<u64>> = fixed
            .iter()
            .map(|k| {
                let mut v = vec![0u64; n];
                for (c, z) in k.iter().zip(&zb) {
                    for (x, y) in v.iter_mut().zip(z) {
                        *x = (*x + c * y) % p;
                    }
                }
                v
            })
            .collect();
        let mut idempotents = vec![self.canonical(&self.unit())];
        for b in &berlekamp {
            let mut next = Vec::new();
            for e in &idempotents {
                let x = self.canonical(&self.mul(b, e));
                next.extend(self.split(&x, e)?);
            }
            idempotents = next;
        }
        let mut blocks = Vec::with_capacity(idempotents.len());
        for e in idempotents {
            let mut span = EchelonBasis::new(p, n);
            for g in 0..n {
                span.insert(&self.canonical(&self.mul(&self.element(g), &e)));
            }
            let mut zspan = EchelonBasis::new(p, n);
            for z in &zb {
                zspan.insert(&self.canonical(&self.mul(z, &e)));
            }
            let f = zspan.rank().max(1);
            let dim = span.rank();
            let k = (1..=dim).find(|k| k * k * f >= dim).unwrap_or(1);
            if k * k * f != dim {
                return Err(Error::Internal(format!("component of dimension {dim} over a degree-{f} center is not a matrix algebra")));
            }
            let trivial = e.iter().fold(0u64, |acc, &c| (acc + c) % p) == 1;
            blocks.push(Block { idempotent: e, dim, simple_dim: k * f, trivial });
        }
        let total: usize = blocks.iter().map(|b| b.dim).sum();
        if total + self.radical.rank() != n {
            return Err(Error::Internal(format!("block dimensions {total} do not fill A/J for {} at p = {p}", self.group.name())));
        }
        Ok(blocks)
    }

    /// Splits idempotent `e` by the eigenvalues of `x ∈ eB` (x^p = x), via Lagrange interpolation.
    fn split(&self, x: &[u64], e: &[u64]) -> Result<Vec<Vec<u64>>> {
        let p = self.p;
        let roots = roots_of_split(&self.min_poly(x, e)?, p).ok_or_else(|| Error::Internal("central element is not split semisimple".into()))?;
        let mut out = Vec::with_capacity(roots.len());
        for &lambda in &roots {
            let mut prod = e.to_vec();
            for &mu in roots.iter().filter(|&&mu| mu != lambda) {
                let inv = inv_mod((lambda + p - mu) as i128 % p as i128, p as i128).expect("field") as u64;
                let factor: Vec<u64> = x.iter().zip(e).map(|(a, b)| ((a + p * p - mu * b % p) % p) * inv % p).collect();
                prod = self.canonical(&self.mul(&prod, &factor));
            }
            if prod.iter().any(|&v| v != 0) {
                out.push(prod);
            }
        }
        if out.is_empty() {
            return Err(Error::Internal("idempotent vanished while splitting".into()));
        }
        Ok(out)
    }

    /// Monic minimal polynomial of `x` in the algebra with identity `e`, low degree first.
    fn min_poly(&self, x: &[u64], e: &[u64]) -> Result<Vec<u64>> {
        let p = self.p;
        let mut powers = vec![e.to_vec()];
        let mut span = EchelonBasis::new(p, e.len());
        span.insert(e);
        loop {
            let next = self.canonical(&self.mul(powers.last().expect("nonempty"), x));
            if span.contains(&next) {
                let a = FpMatrix::from_residue_rows(p, e.len(), powers.clone())?;
                let c = solve_mod_p(&a, &next)?.ok_or_else(|| Error::Internal("power outside its span".into()))?;
                let mut f: Vec<u64> = c.iter().map(|&v| (p - v) % p).collect();
                f.push(1);
                return Ok(f);
            }
            span.insert(&next);
            powers.push(next);
        }
    }
}

fn poly_trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    poly_divmod(a, f, p).1
}

fn poly_mulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    poly_rem(&out, f, p)
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let (mut a, mut b) = (poly_trim(a.to_vec()), poly_trim(b.to_vec()));
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    let lead = inv_mod(*a.last().expect("nonzero") as i128, p as i128).expect("field") as u64;
    a.iter().map(|&c| c * lead % p).collect()
}

/// Roots of a monic polynomial splitting into distinct linear factors over 𝔽_p, or
/// `None` if it does not split.
fn roots_of_split(f: &[u64], p: u64) -> Option<Vec<u64>> {
    const BRUTE: u64 = 64;
    const ATTEMPTS: usize = 128;
    if f.len() <= 1 {
        return Some(vec![]);
    }
    if f.len() == 2 {
        return Some(vec![(p - f[0]) % p]);
    }
    if p <= BRUTE {
        let roots: Vec<u64> = (0..p).filter(|&t| f.iter().rev().fold(0, |acc, &c| (acc * t + c) % p) == 0).collect();
        return (roots.len() + 1 == f.len()).then_some(roots);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p);
    for _ in 0..ATTEMPTS {
        let a = rng.gen_range(0..p);
        let mut acc = vec![1u64];
        let mut base = poly_rem(&[a, 1], f, p);
        let mut k = (p - 1) / 2;
        while k > 0 {
            if k & 1 == 1 {
                acc = poly_mulmod(&acc, &base, f, p);
            }
            base = poly_mulmod(&base, &base, f, p);
            k >>= 1;
        }
        if acc.is_empty() {
            acc.push(0);
        }
        acc[0] = (acc[0] + p - 1) % p;
        let g = poly_gcd(f, &acc, p);
        if g.len() > 1 && g.len() < f.len() {
            let (q, _) = poly_divmod(f, &g, p);
            let mut out = roots_of_split(&g, p)?;
            out.extend(roots_of_split(&q, p)?);
            out.sort_unstable();
            return Some(out);
        }
    }
    None
}

fn poly_divmod(a: &[u64], f: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let mut r = poly_trim(a.to_vec());
    let lead = inv_mod(*f.last().expect("nonzero") as i128, p as i128).expect("field") as u64;
    let mut q = vec![0u64; r.len().saturating_sub(f.len()) + 1];
    while r.len() >= f.len() {
        let shift = r.len() - f.len();
        let c = r.last().expect("nonempty") * lead % p;
        q[shift] = c;
        for (k, &fk) in f.iter().enumerate() {
            r[shift + k] = (r[shift + k] + p - c * fk % p) % p;
        }
        r = poly_trim(r);
    }
    (poly_trim(q), r)
}
