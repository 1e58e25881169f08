use std::fmt;

use super::primes::{is_prime, pow_mod};
use crate::error::{Error, Result};

/// Dense matrix over the prime field of order `p`, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FpMatrix {
    p: u64,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl fmt::Debug for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FpMatrix mod {} ({}x{})", self.p, self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

pub(crate) fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) && p < (1 << 31) {
        Ok(())
    } else {
        Err(Error::InvalidModulus(p))
    }
}

impl FpMatrix {
    pub fn zeros(p: u64, rows: usize, cols: usize) -> Result<Self> {
        check_prime(p)?;
        Ok(FpMatrix { p, rows, cols, data: vec![0; rows * cols] })
    }

    pub fn identity(p: u64, n: usize) -> Result<Self> {
        let mut m = Self::zeros(p, n, n)?;
        for i in 0..n {
            m.data[i * n + i] = 1 % p;
        }
        Ok(m)
    }

    /// Builds from signed integer rows, reducing every entry mod `p`.
    pub fn from_rows(p: u64, cols: usize, rows: &[Vec<i64>]) -> Result<Self> {
        let mut m = Self::zeros(p, rows.len(), cols)?;
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::ShapeMismatch(format!("row {i} has {} entries, expected {cols}", r.len())));
            }
            for (j, &v) in r.iter().enumerate() {
                m.data[i * cols + j] = v.rem_euclid(p as i64) as u64;
            }
        }
        Ok(m)
    }

    /// Builds from rows already reduced into `[0, p)`.
    pub fn from_residue_rows(p: u64, cols: usize, rows: Vec<Vec<u64>>) -> Result<Self> {
        let mut m = Self::zeros(p, 0, cols)?;
        for r in rows {
            m.push_row(&r)?;
        }
        Ok(m)
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v % self.p;
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn push_row(&mut self, row: &[u64]) -> Result<()> {
        if row.len() != self.cols {
            return Err(Error::ShapeMismatch(format!("pushing row of length {} onto {} columns", row.len(), self.cols)));
        }
        self.data.extend(row.iter().map(|v| v % self.p));
        self.rows += 1;
        Ok(())
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut t = FpMatrix { p: self.p, rows: self.cols, cols: self.rows, data: vec![0; self.data.len()] };
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn mul(&self, other: &FpMatrix) -> Result<FpMatrix> {
        if self.cols != other.rows || self.p != other.p {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} (mod {}) by {}x{} (mod {})",
                self.rows, self.cols, self.p, other.rows, other.cols, other.p
            )));
        }
        let p = self.p;
        let mut out = FpMatrix { p, rows: self.rows, cols: other.cols, data: vec![0; self.rows * other.cols] };
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d = (*d + a * b) % p;
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn apply(&self, v: &[u64]) -> Vec<u64> {
        debug_assert_eq!(v.len(), self.rows);
        let p = self.p;
        let mut out = vec![0u64; self.cols];
        for (k, &a) in v.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (d, &b) in out.iter_mut().zip(self.row(k)) {
                *d = (*d + a * b) % p;
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }
}

/// Result of row reduction.
#[derive(Clone, Debug)]
pub struct Rref {
    pub rank: usize,
    /// Reduced echelon basis of the row space.
    pub row_basis: FpMatrix,
    /// Basis of `{k : m kᵀ = 0}`, one vector per row.
    pub kernel: FpMatrix,
    pub pivots: Vec<usize>,
}

pub fn rref(m: &FpMatrix) -> Rref {
    let p = m.p;
    let mut a = m.row_vecs();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m.cols {
        if r == a.len() {
            break;
        }
        let Some(piv) = (r..a.len()).find(|&i| a[i][c] != 0) else { continue };
        a.swap(r, piv);
        let inv = pow_mod(a[r][c], p - 2, p);
        for v in a[r].iter_mut() {
            *v = *v * inv % p;
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let f = row[c];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = (*x + (p - f) * y) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    let mut kernel = Vec::new();
    for free in (0..m.cols).filter(|c| !pivots.contains(c)) {
        let mut k = vec![0u64; m.cols];
        k[free] = 1;
        for (row, &pc) in a.iter().zip(&pivots) {
            k[pc] = (p - row[free]) % p;
        }
        kernel.push(k);
    }
    Rref {
        rank: r,
        row_basis: FpMatrix { p, rows: r, cols: m.cols, data: a.concat() },
        kernel: FpMatrix { p, rows: kernel.len(), cols: m.cols, data: kernel.concat() },
        pivots,
    }
}

/// Solves `x·A = b`; `None` when the system is inconsistent.
pub fn solve_mod_p(a: &FpMatrix, b: &[u64]) -> Result<Option<Vec<u64>>> {
    if b.len() != a.cols {
        return Err(Error::ShapeMismatch(format!("right-hand side has {} entries, matrix has {} columns", b.len(), a.cols)));
    }
    let p = a.p;
    // Augment Aᵀ with b and reduce: columns of Aᵀ are the rows of A.
    let at = a.transpose();
    let mut aug = FpMatrix::zeros(p, at.rows, at.cols + 1)?;
    for r in 0..at.rows {
        for c in 0..at.cols {
            aug.set(r, c, at.get(r, c));
        }
        aug.set(r, at.cols, b[r] % p);
    }
    let red = rref(&aug);
    if red.pivots.contains(&at.cols) {
        return Ok(None);
    }
    let mut x = vec![0u64; a.rows];
    for (i, &pc) in red.pivots.iter().enumerate() {
        x[pc] = red.row_basis.get(i, at.cols);
    }
    Ok(Some(x))
}

/// Incrementally maintained reduced echelon basis of a subspace of `F_p^n`.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    p: u64,
    dim: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl EchelonBasis {
    pub fn new(p: u64, dim: usize) -> Self {
        EchelonBasis { p, dim, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }
    pub fn rank(&self) -> usize {
        self.rows.len()
    }
    pub fn basis(&self) -> &[Vec<u64>] {
        &self.rows
    }
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Reduces `v` against the basis; the result is zero iff `v` lies in the span.
    pub fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let p = self.p;
        let mut w: Vec<u64> = v.iter().map(|x| x % p).collect();
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let f = w[pc];
            if f != 0 {
                for (x, &y) in w.iter_mut().zip(row) {
                    *x = (*x + (p - f) * y) % p;
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// Inserts `v`; returns whether the span grew.
    pub fn insert(&mut self, v: &[u64]) -> bool {
        let p = self.p;
        let mut w = self.reduce(v);
        let Some(pc) = w.iter().position(|&x| x != 0) else { return false };
        let inv = pow_mod(w[pc], p - 2, p);
        for x in w.iter_mut() {
            *x = *x * inv % p;
        }
        for row in self.rows.iter_mut() {
            let f = row[pc];
            if f != 0 {
                for (x, &y) in row.iter_mut().zip(&w) {
                    *x = (*x + (p - f) * y) % p;
                }
            }
        }
        let at = self.pivots.partition_point(|&q| q < pc);
        self.pivots.insert(at, pc);
        self.rows.insert(at, w);
        true
    }

    pub fn to_matrix(&self) -> FpMatrix {
        FpMatrix { p: self.p, rows: self.rows.len(), cols: self.dim, data: self.rows.concat() }
    }

    /// Coordinates of `v` (assumed in the span) with respect to the stored basis.
    pub fn coordinates(&self, v: &[u64]) -> Option<Vec<u64>> {
        if !self.contains(v) {
            return None;
        }
        Some(self.pivots.iter().map(|&pc| v[pc] % self.p).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_examples() {
        let id = FpMatrix::identity(2, 2).unwrap();
        let r = rref(&id);
        assert_eq!(r.rank, 2);
        assert_eq!(r.kernel.rows(), 0);

        let ones = FpMatrix::from_rows(2, 2, &[vec![1, 1], vec![1, 1]]).unwrap();
        let r = rref(&ones);
        assert_eq!(r.rank, 1);
        assert_eq!(r.kernel.row_vecs(), vec![vec![1, 1]]);

        let z = FpMatrix::zeros(5, 3, 3).unwrap();
        let r = rref(&z);
        assert_eq!(r.rank, 0);
        assert_eq!(r.kernel.rows(), 3);
    }

    #[test]
    fn non_prime_modulus_rejected() {
        assert_eq!(FpMatrix::zeros(4, 1, 1).unwrap_err(), Error::InvalidModulus(4));
    }

    #[test]
    fn solve_examples() {
        let id = FpMatrix::identity(3, 2).unwrap();
        assert_eq!(solve_mod_p(&id, &[1, 0]).unwrap(), Some(vec![1, 0]));
        let a = FpMatrix::from_rows(2, 2, &[vec![1, 1]]).unwrap();
        assert_eq!(solve_mod_p(&a, &[1, 1]).unwrap(), Some(vec![1]));
        let a = FpMatrix::from_rows(2, 1, &[vec![2]]).unwrap();
        assert_eq!(solve_mod_p(&a, &[1]).unwrap(), None);
        assert!(solve_mod_p(&a, &[1, 1]).is_err());
    }

    #[test]
    fn echelon_insert_and_contains() {
        let mut e = EchelonBasis::new(3, 3);
        assert!(e.insert(&[1, 2, 0]));
        assert!(e.insert(&[0, 1, 1]));
        assert!(!e.insert(&[1, 0, 1]));
        assert!(e.contains(&[2, 1, 0]));
        assert_eq!(e.rank(), 2);
    }
}
