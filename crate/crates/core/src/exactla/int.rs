use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense integer matrix with arbitrary-precision entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_i64(rows: &[Vec<i64>], cols: usize) -> Result<Self> {
        let big: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
        Self::from_rows(big, cols)
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>, cols: usize) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != cols {
                return Err(Error::ShapeMismatch(format!("row {i} has {} entries, expected {cols}", r.len())));
            }
            data.extend(r);
        }
        Ok(IntMatrix { rows: n, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c).clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.cols];
        for (k, a) in v.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (d, b) in out.iter_mut().zip(self.row(k)) {
                if !b.is_zero() {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Determinant by fraction-free elimination (square matrices only).
    pub fn determinant(&self) -> Result<BigInt> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.row_vecs();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            let Some(piv) = (k..n).find(|&i| !a[i][k].is_zero()) else { return Ok(BigInt::zero()) };
            if piv != k {
                a.swap(piv, k);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
                a[i][k] = BigInt::zero();
            }
            prev = a[k][k].clone();
        }
        Ok(if n == 0 { BigInt::one() } else { sign * &a[n - 1][n - 1] })
    }
}

impl IntMatrix {
    /// Inverse of a square matrix with determinant ±1.
    pub fn inverse_unimodular(&self) -> Result<IntMatrix> {
        let n = self.rows;
        if n != self.cols {
            return Err(Error::ShapeMismatch("inverse of a non-square matrix".into()));
        }
        let mut a: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                let mut row: Vec<BigRational> = self.row(i).iter().map(|x| BigRational::from_integer(x.clone())).collect();
                row.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
                row
            })
            .collect();
        for c in 0..n {
            let piv = (c..n).find(|&r| !a[r][c].is_zero()).ok_or_else(|| Error::ShapeMismatch("singular matrix".into()))?;
            a.swap(c, piv);
            let inv = a[c][c].recip();
            for x in a[c].iter_mut() {
                *x *= &inv;
            }
            for r in 0..n {
                if r != c && !a[r][c].is_zero() {
                    let f = a[r][c].clone();
                    let src = a[c].clone();
                    for (x, y) in a[r].iter_mut().zip(&src) {
                        *x -= &f * y;
                    }
                }
            }
        }
        let rows = a
            .into_iter()
            .map(|r| {
                r[n..]
                    .iter()
                    .map(|x| if x.is_integer() { Ok(x.to_integer()) } else { Err(Error::ShapeMismatch("matrix is not unimodular".into())) })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        IntMatrix::from_rows(rows, n)
    }
}

fn add_multiple(rows: &mut [Vec<BigInt>], dst: usize, src: usize, f: &BigInt) {
    if f.is_zero() {
        return;
    }
    let s = rows[src].clone();
    for (x, y) in rows[dst].iter_mut().zip(&s) {
        if !y.is_zero() {
            *x += f * y;
        }
    }
}

/// Row-style Hermite normal form. Returns the nonzero echelon rows (positive
/// pivots, entries above each pivot reduced into `[0, pivot)`) and, when
/// `track` is set, a unimodular `T` with `T·A = [H; 0]`.
pub(crate) fn hermite(rows: Vec<Vec<BigInt>>, cols: usize, track: bool) -> (Vec<Vec<BigInt>>, Vec<usize>, Option<Vec<Vec<BigInt>>>) {
    let n = rows.len();
    let mut a = rows;
    let mut t: Option<Vec<Vec<BigInt>>> = track.then(|| {
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect()
    });
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == n {
            break;
        }
        loop {
            let best = (r..n).filter(|&i| !a[i][c].is_zero()).min_by_key(|&i| a[i][c].abs());
            let Some(best) = best else { break };
            a.swap(r, best);
            if let Some(t) = t.as_mut() {
                t.swap(r, best);
            }
            let mut done = true;
            for i in r + 1..n {
                if a[i][c].is_zero() {
                    continue;
                }
                let q = -a[i][c].div_floor(&a[r][c]);
                add_multiple(&mut a, i, r, &q);
                if let Some(t) = t.as_mut() {
                    add_multiple(t, i, r, &q);
                }
                if !a[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if a[r][c].is_zero() {
            continue;
        }
        if a[r][c].is_negative() {
            for x in a[r].iter_mut() {
                *x = -&*x;
            }
            if let Some(t) = t.as_mut() {
                for x in t[r].iter_mut() {
                    *x = -&*x;
                }
            }
        }
        for i in 0..r {
            let q = -a[i][c].div_floor(&a[r][c]);
            add_multiple(&mut a, i, r, &q);
            if let Some(t) = t.as_mut() {
                add_multiple(t, i, r, &q);
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    (a, pivots, t)
}

/// A ℤ-lattice given by a Hermite-reduced basis; supports membership and
/// the exponent of a vector modulo the lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    dim: usize,
    basis: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

impl Lattice {
    pub fn from_generators(rows: Vec<Vec<BigInt>>, dim: usize) -> Self {
        let (basis, pivots, _) = hermite(rows, dim, false);
        Lattice { dim, basis, pivots }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn basis(&self) -> &[Vec<BigInt>] {
        &self.basis
    }

    /// Coordinates over ℚ of `v` in the basis, or `None` if `v` is outside
    /// the rational span.
    pub fn rational_coords(&self, v: &[BigInt]) -> Option<Vec<BigRational>> {
        let mut w: Vec<BigRational> = v.iter().map(|x| BigRational::from_integer(x.clone())).collect();
        let mut coords = Vec::with_capacity(self.basis.len());
        for (row, &pc) in self.basis.iter().zip(&self.pivots) {
            let f = &w[pc] / BigRational::from_integer(row[pc].clone());
            if !f.is_zero() {
                for (x, y) in w.iter_mut().zip(row) {
                    if !y.is_zero() {
                        *x -= &f * BigRational::from_integer(y.clone());
                    }
                }
            }
            coords.push(f);
        }
        w.iter().all(Zero::is_zero).then_some(coords)
    }

    /// Integer coordinates of `v`, if `v` is in the lattice.
    pub fn coords(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        let q = self.rational_coords(v)?;
        q.iter().all(|x| x.is_integer()).then(|| q.iter().map(|x| x.to_integer()).collect())
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.coords(v).is_some()
    }

    /// Smallest `m > 0` with `m·v` in the lattice; `None` if no multiple is.
    pub fn exponent_of(&self, v: &[BigInt]) -> Option<BigInt> {
        let q = self.rational_coords(v)?;
        Some(q.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom())))
    }
}

#[derive(Clone, Debug)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub d: IntMatrix,
    /// Diagonal of `d`: `min(rows, cols)` non-negative entries forming a
    /// divisibility chain.
    pub factors: Vec<BigInt>,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.factors.iter().filter(|f| !f.is_zero()).count()
    }
}

pub fn smith_normal_form(a: &IntMatrix) -> SmithForm {
    let (m, n) = (a.rows, a.cols);
    let mut d = a.row_vecs();
    let mut u: Vec<Vec<BigInt>> = IntMatrix::identity(m).row_vecs();
    // Column operations are tracked on Vᵀ as row operations.
    let mut vt: Vec<Vec<BigInt>> = IntMatrix::identity(n).row_vecs();

    fn col_add(d: &mut [Vec<BigInt>], dst: usize, src: usize, f: &BigInt) {
        for row in d.iter_mut() {
            let s = row[src].clone();
            if !s.is_zero() {
                row[dst] += f * s;
            }
        }
    }
    fn col_swap(d: &mut [Vec<BigInt>], i: usize, j: usize) {
        for row in d.iter_mut() {
            row.swap(i, j);
        }
    }

    let k = m.min(n);
    for t in 0..k {
        loop {
            // Minimal-absolute-value pivot in the trailing block.
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    if d[i][j].is_zero() {
                        continue;
                    }
                    if best.is_none_or(|(bi, bj)| d[i][j].abs() < d[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { break };
            d.swap(t, bi);
            u.swap(t, bi);
            col_swap(&mut d, t, bj);
            vt.swap(t, bj);

            let mut clean = true;
            for i in t + 1..m {
                if d[i][t].is_zero() {
                    continue;
                }
                let q = -d[i][t].div_floor(&d[t][t]);
                add_multiple(&mut d, i, t, &q);
                add_multiple(&mut u, i, t, &q);
                if !d[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..n {
                if d[t][j].is_zero() {
                    continue;
                }
                let q = -d[t][j].div_floor(&d[t][t]);
                col_add(&mut d, j, t, &q);
                add_multiple(&mut vt, j, t, &q);
                if !d[t][j].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // Enforce divisibility of the trailing block by the pivot.
            let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| !d[i][j].is_multiple_of(&d[t][t])));
            match bad {
                Some(i) => {
                    let one = BigInt::one();
                    add_multiple(&mut d, t, i, &one);
                    add_multiple(&mut u, t, i, &one);
                }
                None => break,
            }
        }
        if d[t][t].is_negative() {
            for x in d[t].iter_mut() {
                *x = -&*x;
            }
            for x in u[t].iter_mut() {
                *x = -&*x;
            }
        }
    }
    let factors = (0..k).map(|i| d[i][i].clone()).collect();
    SmithForm {
        u: IntMatrix::from_rows(u, m).expect("square"),
        v: IntMatrix::from_rows(vt, n).expect("square").transpose(),
        d: IntMatrix::from_rows(d, n).expect("shape"),
        factors,
    }
}

/// Hermite-reduced basis of the left kernel `{x : x·A = 0}`, one vector per row.
pub fn integer_kernel(a: &IntMatrix) -> IntMatrix {
    let (h, _, t) = hermite(a.row_vecs(), a.cols, true);
    let t = t.expect("tracked");
    let kernel_rows: Vec<Vec<BigInt>> = t[h.len()..].to_vec();
    let (basis, _, _) = hermite(kernel_rows, a.rows, false);
    IntMatrix::from_rows(basis, a.rows).expect("shape")
}

/// Integer coefficients `c` with `Σ c_i·rows[i] = target`, if any exist.
pub fn integer_combination(rows: &[Vec<BigInt>], target: &[BigInt]) -> Option<Vec<BigInt>> {
    let cols = target.len();
    if rows.iter().any(|r| r.len() != cols) {
        return None;
    }
    let (h, pivots, t) = hermite(rows.to_vec(), cols, true);
    let t = t.expect("tracked");
    let mut w = target.to_vec();
    let mut y = Vec::with_capacity(h.len());
    for (row, &pc) in h.iter().zip(&pivots) {
        let (q, r) = w[pc].div_rem(&row[pc]);
        if !r.is_zero() {
            return None;
        }
        if !q.is_zero() {
            for (x, v) in w.iter_mut().zip(row) {
                if !v.is_zero() {
                    *x -= &q * v;
                }
            }
        }
        y.push(q);
    }
    if !w.iter().all(Zero::is_zero) {
        return None;
    }
    let mut c = vec![BigInt::zero(); rows.len()];
    for (yi, ti) in y.iter().zip(&t) {
        if yi.is_zero() {
            continue;
        }
        for (cj, tij) in c.iter_mut().zip(ti) {
            if !tij.is_zero() {
                *cj += yi * tij;
            }
        }
    }
    Some(c)
}

/// Hermite-reduced basis of the row lattice of `a`.
pub fn hermite_basis(a: &IntMatrix) -> IntMatrix {
    let (h, _, _) = hermite(a.row_vecs(), a.cols, false);
    IntMatrix::from_rows(h, a.cols).expect("shape")
}

pub fn to_big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        to_big(v)
    }

    #[test]
    fn snf_examples() {
        let a = IntMatrix::from_i64(&[vec![2, 0], vec![0, 3]], 2).unwrap();
        let s = smith_normal_form(&a);
        assert_eq!(s.factors, big(&[1, 6]));
        assert_eq!(s.u.mul(&a).unwrap().mul(&s.v).unwrap(), s.d);

        let s = smith_normal_form(&IntMatrix::identity(4));
        assert!(s.factors.iter().all(|f| f.is_one()));

        let a = IntMatrix::from_i64(&[vec![2, 0], vec![0, 2]], 2).unwrap();
        assert_eq!(smith_normal_form(&a).factors, big(&[2, 2]));
    }

    #[test]
    fn kernel_examples() {
        let a = IntMatrix::from_i64(&[vec![1], vec![1]], 1).unwrap();
        let k = integer_kernel(&a);
        assert_eq!(k.rows(), 1);
        let r = k.row(0);
        assert!(r == big(&[1, -1]).as_slice() || r == big(&[-1, 1]).as_slice());

        assert_eq!(integer_kernel(&IntMatrix::identity(3)).rows(), 0);

        let a = IntMatrix::from_i64(&[vec![2, 0], vec![0, 0]], 2).unwrap();
        assert_eq!(integer_kernel(&a).row_vecs(), vec![big(&[0, 1])]);
    }

    #[test]
    fn combinations_reproduce_targets() {
        let rows = vec![big(&[2, 1, 0]), big(&[4, 2, 0]), big(&[0, 3, 5]), big(&[1, 1, 1])];
        let target = big(&[3, 5, 6]);
        let c = integer_combination(&rows, &target).expect("in span");
        let mut sum = vec![BigInt::zero(); 3];
        for (ci, r) in c.iter().zip(&rows) {
            for (s, x) in sum.iter_mut().zip(r) {
                *s += ci * x;
            }
        }
        assert_eq!(sum, target);
        assert!(integer_combination(&[big(&[2, 0])], &big(&[1, 0])).is_none());
        assert!(integer_combination(&[big(&[2, 0])], &big(&[2, 1])).is_none());
    }

    #[test]
    fn lattice_exponent() {
        let l = Lattice::from_generators(vec![big(&[2, 0]), big(&[0, 3])], 2);
        assert_eq!(l.exponent_of(&big(&[1, 1])), Some(BigInt::from(6)));
        assert!(l.contains(&big(&[4, 3])));
        assert_eq!(l.exponent_of(&big(&[0, 0])), Some(BigInt::one()));
        let line = Lattice::from_generators(vec![big(&[1, 1])], 2);
        assert_eq!(line.exponent_of(&big(&[1, 0])), None);
    }

    #[test]
    fn unimodular_inverse() {
        let a = IntMatrix::from_i64(&[vec![2, 1], vec![1, 1]], 2).unwrap();
        let inv = a.inverse_unimodular().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), IntMatrix::identity(2));
        assert!(IntMatrix::from_i64(&[vec![2, 0], vec![0, 1]], 2).unwrap().inverse_unimodular().is_err());
    }

    #[test]
    fn determinant_small() {
        let a = IntMatrix::from_i64(&[vec![2, 1], vec![1, 1]], 2).unwrap();
        assert_eq!(a.determinant().unwrap(), BigInt::one());
        let a = IntMatrix::from_i64(&[vec![0, 1, 2], vec![1, 0, 3], vec![4, -3, 8]], 3).unwrap();
        assert_eq!(a.determinant().unwrap(), BigInt::from(-2));
    }
}
