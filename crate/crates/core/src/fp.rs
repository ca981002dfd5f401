//! Exact arithmetic in F_p and on small dense matrices over F_p.
//!
//! Moduli are machine integers below 2^16, so every product of two reduced
//! residues fits in a `u64` accumulator without overflow.

use std::fmt;

use crate::error::{Error, Result};

/// Largest admissible modulus (exclusive).
pub const MAX_MODULUS: u32 = 1 << 16;

/// Checks that `p` is a prime in `[2, 2^16)`.
pub fn check_prime(p: u32) -> Result<()> {
    if !(2..MAX_MODULUS).contains(&p) {
        return Err(Error::BadModulus(p));
    }
    let mut k = 2u32;
    while k * k <= p {
        if p.is_multiple_of(k) {
            return Err(Error::BadModulus(p));
        }
        k += 1;
    }
    Ok(())
}

#[inline]
pub fn add(p: u32, a: u32, b: u32) -> u32 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub fn sub(p: u32, a: u32, b: u32) -> u32 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

#[inline]
pub fn neg(p: u32, a: u32) -> u32 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

#[inline]
pub fn mul(p: u32, a: u32, b: u32) -> u32 {
    ((a as u64 * b as u64) % p as u64) as u32
}

pub fn pow(p: u32, mut a: u32, mut e: u64) -> u32 {
    let mut acc = 1 % p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(p, acc, a);
        }
        a = mul(p, a, a);
        e >>= 1;
    }
    acc
}

/// Multiplicative inverse of a nonzero residue (Fermat).
pub fn inv(p: u32, a: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(p), "inverse of zero");
    pow(p, a, p as u64 - 2)
}

/// Reduces an arbitrary signed integer into `[0, p)`.
pub fn reduce(p: u32, v: i64) -> u32 {
    v.rem_euclid(p as i64) as u32
}

/// A single element of F_p carrying its modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FpScalar {
    p: u32,
    value: u32,
}

impl FpScalar {
    pub fn new(p: u32, v: i64) -> Self {
        FpScalar {
            p,
            value: reduce(p, v),
        }
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn inverse(&self) -> Option<Self> {
        (self.value != 0).then(|| FpScalar {
            p: self.p,
            value: inv(self.p, self.value),
        })
    }
}

impl std::ops::Add for FpScalar {
    type Output = FpScalar;
    fn add(self, rhs: Self) -> Self {
        debug_assert_eq!(self.p, rhs.p);
        FpScalar {
            p: self.p,
            value: add(self.p, self.value, rhs.value),
        }
    }
}

impl std::ops::Sub for FpScalar {
    type Output = FpScalar;
    fn sub(self, rhs: Self) -> Self {
        debug_assert_eq!(self.p, rhs.p);
        FpScalar {
            p: self.p,
            value: sub(self.p, self.value, rhs.value),
        }
    }
}

impl std::ops::Mul for FpScalar {
    type Output = FpScalar;
    fn mul(self, rhs: Self) -> Self {
        debug_assert_eq!(self.p, rhs.p);
        FpScalar {
            p: self.p,
            value: mul(self.p, self.value, rhs.value),
        }
    }
}

impl std::ops::Neg for FpScalar {
    type Output = FpScalar;
    fn neg(self) -> Self {
        FpScalar {
            p: self.p,
            value: neg(self.p, self.value),
        }
    }
}

impl fmt::Display for FpScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Dense row-major matrix over F_p.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MatFp {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl fmt::Debug for MatFp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MatFp(p={}, {:?})", self.p, self.to_rows())
    }
}

impl MatFp {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        MatFp {
            p,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % p;
        }
        m
    }

    /// Builds a matrix from integer rows, reducing every entry mod `p`.
    pub fn from_rows(p: u32, rows: &[Vec<i64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let data = rows
            .iter()
            .flat_map(|row| row.iter().map(|&v| reduce(p, v)))
            .collect();
        Ok(MatFp {
            p,
            rows: r,
            cols: c,
            data,
        })
    }

    /// Builds a matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(p: u32, rows: usize, columns: &[Vec<u32>]) -> Self {
        let mut m = Self::zeros(p, rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            debug_assert_eq!(col.len(), rows);
            for (i, &v) in col.iter().enumerate() {
                m.data[i * m.cols + j] = v % p;
            }
        }
        m
    }

    pub fn from_row_vectors(p: u32, cols: usize, rows: &[Vec<u32>]) -> Self {
        let mut m = Self::zeros(p, rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            debug_assert_eq!(row.len(), cols);
            for (j, &v) in row.iter().enumerate() {
                m.data[i * cols + j] = v % p;
            }
        }
        m
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v % self.p;
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        self.data.chunks(self.cols.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<u32> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn row(&self, i: usize) -> Vec<u32> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    fn check_same_shape(&self, other: &MatFp) -> Result<()> {
        if self.p != other.p {
            return Err(Error::ModulusMismatch(self.p, other.p));
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &MatFp) -> Result<MatFp> {
        self.check_same_shape(other)?;
        let p = self.p;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| add(p, a, b))
            .collect();
        Ok(MatFp { data, ..*self })
    }

    pub fn sub(&self, other: &MatFp) -> Result<MatFp> {
        self.check_same_shape(other)?;
        let p = self.p;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| sub(p, a, b))
            .collect();
        Ok(MatFp { data, ..*self })
    }

    pub fn neg(&self) -> MatFp {
        let p = self.p;
        MatFp {
            data: self.data.iter().map(|&a| neg(p, a)).collect(),
            ..*self
        }
    }

    pub fn scale(&self, c: u32) -> MatFp {
        let p = self.p;
        MatFp {
            data: self.data.iter().map(|&a| mul(p, a, c % p)).collect(),
            ..*self
        }
    }

    pub fn transpose(&self) -> MatFp {
        let mut t = MatFp::zeros(self.p, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    /// Exact product `self * other` mod p.
    pub fn mat_mul(&self, other: &MatFp) -> Result<MatFp> {
        if self.p != other.p {
            return Err(Error::ModulusMismatch(self.p, other.p));
        }
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let p = self.p as u64;
        let mut out = MatFp::zeros(self.p, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = 0u64;
                for k in 0..self.cols {
                    acc += self.get(i, k) as u64 * other.get(k, j) as u64;
                    // 2^32 per term; reduce before 2^64 can overflow
                    if k % 1024 == 1023 {
                        acc %= p;
                    }
                }
                out.data[i * other.cols + j] = (acc % p) as u32;
            }
        }
        Ok(out)
    }

    /// Matrix-vector product for a vector of residues.
    pub fn mul_vec(&self, v: &[u32]) -> Result<Vec<u32>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        let p = self.p as u64;
        Ok((0..self.rows)
            .map(|i| {
                let acc: u64 = (0..self.cols)
                    .map(|k| (self.get(i, k) as u64 * v[k] as u64) % p)
                    .sum();
                (acc % p) as u32
            })
            .collect())
    }

    pub fn pow(&self, e: u32) -> Result<MatFp> {
        if !self.is_square() {
            return Err(Error::Dimension("power of a non-square matrix".into()));
        }
        let mut acc = MatFp::identity(self.p, self.rows);
        for _ in 0..e {
            acc = acc.mat_mul(self)?;
        }
        Ok(acc)
    }

    /// Reduced row echelon form with first-nonzero pivoting, returning the
    /// reduced matrix and its pivot columns.
    pub fn rref(&self) -> (MatFp, Vec<usize>) {
        let p = self.p;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(pr) = (row..m.rows).find(|&r| m.get(r, col) != 0) else {
                continue;
            };
            if pr != row {
                for c in 0..m.cols {
                    m.data.swap(pr * m.cols + c, row * m.cols + c);
                }
            }
            let iv = inv(p, m.get(row, col));
            for c in col..m.cols {
                let v = m.get(row, c);
                m.data[row * m.cols + c] = mul(p, v, iv);
            }
            for r in 0..m.rows {
                if r == row {
                    continue;
                }
                let f = m.get(r, col);
                if f == 0 {
                    continue;
                }
                for c in col..m.cols {
                    let v = sub(p, m.get(r, c), mul(p, f, m.get(row, c)));
                    m.data[r * m.cols + c] = v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel `{v : self * v = 0}`; empty iff injective.
    pub fn kernel_basis(&self) -> Vec<Vec<u32>> {
        let p = self.p;
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![None; self.cols];
        for (row, &c) in pivots.iter().enumerate() {
            is_pivot[c] = Some(row);
        }
        (0..self.cols)
            .filter(|&c| is_pivot[c].is_none())
            .map(|free| {
                let mut v = vec![0u32; self.cols];
                v[free] = 1 % p;
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = neg(p, r.get(row, free));
                }
                v
            })
            .collect()
    }

    /// Some solution of `self * x = rhs`, if one exists.
    pub fn solve(&self, rhs: &[u32]) -> Option<Vec<u32>> {
        debug_assert_eq!(rhs.len(), self.rows);
        let mut aug = MatFp::zeros(self.p, self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.data[i * (self.cols + 1) + j] = self.get(i, j);
            }
            aug.data[i * (self.cols + 1) + self.cols] = rhs[i] % self.p;
        }
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![0u32; self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = r.get(row, self.cols);
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<MatFp> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut aug = MatFp::zeros(self.p, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.data[i * 2 * n + j] = self.get(i, j);
            }
            aug.data[i * 2 * n + n + i] = 1 % self.p;
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut out = MatFp::zeros(self.p, n, n);
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] = r.get(i, n + j);
            }
        }
        Some(out)
    }

    /// True iff the square matrix satisfies `self^rows = 0`.
    pub fn is_nilpotent(&self) -> bool {
        self.is_square() && self.pow(self.rows as u32).is_ok_and(|m| m.is_zero())
    }

    pub fn is_strictly_upper(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols.min(i + 1)).all(|j| self.get(i, j) == 0))
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.rows).all(|i| (i + 1..self.cols).all(|j| self.get(i, j) == 0))
    }
}

/// True iff `(a - I)^d = 0` for the square `d x d` matrix `a`.
pub fn is_unipotent(a: &MatFp, d: usize) -> bool {
    if a.rows() != d || a.cols() != d {
        return false;
    }
    let shifted = a
        .sub(&MatFp::identity(a.modulus(), d))
        .expect("shapes checked");
    shifted.is_nilpotent()
}

/// Exact product; thin wrapper kept for symmetry with the other kernels.
pub fn mat_mul(a: &MatFp, b: &MatFp) -> Result<MatFp> {
    a.mat_mul(b)
}

pub fn kernel_basis(a: &MatFp) -> Vec<Vec<u32>> {
    a.kernel_basis()
}

/// Change of basis `P` such that `P^-1 M P` is strictly upper triangular for
/// every `M` in a commuting family of nilpotent matrices.
///
/// Builds the flag `0 = V_0 < V_1 < ... < V_s = F_p^n` with
/// `V_{k+1} = {v : M v in V_k for all M}` and lists a basis adapted to it.
pub fn joint_strict_triangularize(mats: &[MatFp]) -> Result<MatFp> {
    let Some(first) = mats.first() else {
        // the vacuous family has no dimension; callers pass at least one
        // matrix when they need a concrete size
        return Ok(MatFp::identity(2, 0));
    };
    let p = first.modulus();
    let n = first.rows();
    for (idx, m) in mats.iter().enumerate() {
        if m.modulus() != p {
            return Err(Error::ModulusMismatch(p, m.modulus()));
        }
        if m.rows() != n || m.cols() != n {
            return Err(Error::Dimension(format!("matrix {idx} is not {n}x{n}")));
        }
        if !m.is_nilpotent() {
            return Err(Error::NotNilpotent(idx));
        }
    }
    for i in 0..mats.len() {
        for j in i + 1..mats.len() {
            if mats[i].mat_mul(&mats[j])? != mats[j].mat_mul(&mats[i])? {
                return Err(Error::NonCommuting(i, j));
            }
        }
    }
    // current flag member, as an echelon list of row vectors
    let mut basis: Vec<Vec<u32>> = Vec::new();
    while basis.len() < n {
        // annihilator rows C with ker C = span(basis)
        let constraint = if basis.is_empty() {
            MatFp::identity(p, n)
        } else {
            let b = MatFp::from_row_vectors(p, n, &basis);
            let ann = b.kernel_basis();
            MatFp::from_row_vectors(p, n, &ann)
        };
        let mut stacked_rows = Vec::new();
        for m in mats {
            let cm = constraint.mat_mul(m)?;
            stacked_rows.extend(cm.to_rows());
        }
        let next = if stacked_rows.is_empty() {
            (0..n)
                .map(|i| {
                    let mut v = vec![0; n];
                    v[i] = 1;
                    v
                })
                .collect()
        } else {
            MatFp::from_row_vectors(p, n, &stacked_rows).kernel_basis()
        };
        let before = basis.len();
        for v in next {
            let mut trial = basis.clone();
            trial.push(v.clone());
            if MatFp::from_row_vectors(p, n, &trial).rank() == trial.len() {
                basis = trial;
            }
        }
        if basis.len() == before {
            return Err(Error::Inconsistent("flag construction stalled".into()));
        }
    }
    Ok(MatFp::from_columns(p, n, &basis))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e2(p: u32) -> MatFp {
        MatFp::from_rows(p, &[vec![0, 1], vec![0, 0]]).unwrap()
    }

    #[test]
    fn products() {
        let m = MatFp::from_rows(5, &[vec![1, 2], vec![3, 4]]).unwrap();
        assert_eq!(MatFp::identity(5, 2).mat_mul(&m).unwrap(), m);
        assert!(MatFp::zeros(5, 2, 2).mat_mul(&m).unwrap().is_zero());
        assert!(e2(2).mat_mul(&e2(2)).unwrap().is_zero());
        let bad = MatFp::zeros(5, 3, 3);
        assert!(matches!(m.mat_mul(&bad), Err(Error::Dimension(_))));
        assert!(matches!(
            m.mat_mul(&MatFp::zeros(3, 2, 2)),
            Err(Error::ModulusMismatch(5, 3))
        ));
    }

    #[test]
    fn kernels() {
        assert!(MatFp::identity(3, 2).kernel_basis().is_empty());
        assert_eq!(MatFp::zeros(3, 2, 2).kernel_basis().len(), 2);
        assert_eq!(e2(2).kernel_basis(), vec![vec![1, 0]]);
    }

    #[test]
    fn unipotence() {
        assert!(is_unipotent(&MatFp::identity(3, 3), 3));
        let ie = MatFp::identity(2, 2).add(&e2(2)).unwrap();
        assert!(is_unipotent(&ie, 2));
        let diag = MatFp::from_rows(3, &[vec![2, 0], vec![0, 1]]).unwrap();
        // (diag - I)^2 = diag(1, 0)
        let sq = diag.sub(&MatFp::identity(3, 2)).unwrap().pow(2).unwrap();
        assert_eq!(sq, MatFp::from_rows(3, &[vec![1, 0], vec![0, 0]]).unwrap());
        assert!(!is_unipotent(&diag, 2));
    }

    #[test]
    fn primes() {
        assert!(check_prime(2).is_ok());
        assert!(check_prime(65521).is_ok());
        assert!(check_prime(1).is_err());
        assert!(check_prime(9).is_err());
        assert!(check_prime(65536).is_err());
    }

    #[test]
    fn inverse_and_solve() {
        let m = MatFp::from_rows(7, &[vec![2, 3], vec![1, 4]]).unwrap();
        let mi = m.inverse().unwrap();
        assert_eq!(m.mat_mul(&mi).unwrap(), MatFp::identity(7, 2));
        let x = m.solve(&[5, 6]).unwrap();
        assert_eq!(m.mul_vec(&x).unwrap(), vec![5, 6]);
        assert!(e2(2).inverse().is_none());
        assert!(e2(2).solve(&[0, 1]).is_none());
    }

    #[test]
    fn triangularize_trivial_cases() {
        assert_eq!(joint_strict_triangularize(&[]).unwrap().rows(), 0);
        let p = joint_strict_triangularize(&[e2(2)]).unwrap();
        assert_eq!(p, MatFp::identity(2, 2));
    }

    #[test]
    fn triangularize_errors() {
        let lower = e2(2).transpose();
        assert_eq!(
            joint_strict_triangularize(&[e2(2), lower]),
            Err(Error::NonCommuting(0, 1))
        );
        assert_eq!(
            joint_strict_triangularize(&[MatFp::identity(2, 2)]),
            Err(Error::NotNilpotent(0))
        );
    }

    /// All complete flags of F_2^3, found by brute force over ordered bases.
    fn flag_oracle_exists(mats: &[MatFp]) -> bool {
        let vecs: Vec<Vec<u32>> = (1u32..8).map(|b| (0..3).map(|i| (b >> i) & 1).collect()).collect();
        for a in &vecs {
            for b in &vecs {
                for c in &vecs {
                    let pm = MatFp::from_columns(2, 3, &[a.clone(), b.clone(), c.clone()]);
                    let Some(pi) = pm.inverse() else { continue };
                    if mats.iter().all(|m| {
                        pi.mat_mul(m).unwrap().mat_mul(&pm).unwrap().is_strictly_upper()
                    }) {
                        return true;
                    }
                }
            }
        }
        false
    }

    #[test]
    fn triangularize_commuting_pair_matches_flag_search() {
        // N and N^2 for a nilpotent N with a nonstandard flag
        let n = MatFp::from_rows(2, &[vec![0, 0, 0], vec![1, 0, 0], vec![1, 1, 0]]).unwrap();
        let n2 = n.mat_mul(&n).unwrap();
        let fam = vec![n.clone(), n2.clone()];
        assert!(flag_oracle_exists(&fam));
        let pm = joint_strict_triangularize(&fam).unwrap();
        let pi = pm.inverse().unwrap();
        for m in &fam {
            assert!(pi.mat_mul(m).unwrap().mat_mul(&pm).unwrap().is_strictly_upper());
        }
        // any product of 3 conjugated members is zero
        let c: Vec<MatFp> = fam
            .iter()
            .map(|m| pi.mat_mul(m).unwrap().mat_mul(&pm).unwrap())
            .collect();
        for a in &c {
            for b in &c {
                for d in &c {
                    assert!(a.mat_mul(b).unwrap().mat_mul(d).unwrap().is_zero());
                }
            }
        }
    }
}
