//! F_p((t))-linear maps given by square matrices of Laurent polynomials.
//!
//! As block matrices these are Toeplitz: the block at `(i, j)` is the
//! coefficient of `t^{i-j}`.

use std::collections::BTreeMap;

use super::BlockMatrix;
use crate::error::{Error, Result};
use crate::fp::{self, MatFp};
use crate::laurent::{check_degree, Precision, SeriesVector};

/// `T = sum_m T_m t^m` with finitely many nonzero `d x d` coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentMatrix {
    p: u32,
    d: usize,
    coeffs: BTreeMap<i64, MatFp>,
}

impl LaurentMatrix {
    pub fn new(p: u32, d: usize, coeffs: impl IntoIterator<Item = (i64, MatFp)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (m, c) in coeffs {
            check_degree(m)?;
            if c.rows() != d || c.cols() != d || c.modulus() != p {
                return Err(Error::Dimension(format!("coefficient must be {d}x{d} mod {p}")));
            }
            if !c.is_zero() {
                map.insert(m, c);
            }
        }
        Ok(LaurentMatrix { p, d, coeffs: map })
    }

    pub fn identity(p: u32, d: usize) -> Self {
        Self::new(p, d, [(0, MatFp::identity(p, d))]).expect("identity")
    }

    /// The matrix whose `k`-th column is the exact vector `cols[k]`.
    pub fn from_columns(p: u32, d: usize, cols: &[SeriesVector]) -> Result<Self> {
        if cols.len() != d {
            return Err(Error::Dimension(format!("{} columns for d = {d}", cols.len())));
        }
        let mut map: BTreeMap<i64, MatFp> = BTreeMap::new();
        for (k, c) in cols.iter().enumerate() {
            if !c.is_exact() {
                return Err(Error::Precision("columns must be exact".into()));
            }
            for (deg, v) in c.terms() {
                let m = map.entry(deg).or_insert_with(|| MatFp::zeros(p, d, d));
                for (row, &x) in v.iter().enumerate() {
                    m.set(row, k, x);
                }
            }
        }
        Self::new(p, d, map)
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, MatFp> {
        &self.coeffs
    }

    /// Entry `(row, col)` as a scalar Laurent polynomial, keyed by degree.
    pub fn entry(&self, row: usize, col: usize) -> BTreeMap<i64, u32> {
        self.coeffs
            .iter()
            .filter_map(|(m, c)| {
                let x = c.get(row, col);
                (x != 0).then_some((*m, x))
            })
            .collect()
    }

    pub fn column(&self, k: usize) -> SeriesVector {
        let coeffs = self.coeffs.iter().map(|(m, c)| (*m, c.column(k)));
        SeriesVector::exact(self.p, self.d, coeffs).expect("column within window")
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_degree(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn mul(&self, other: &LaurentMatrix) -> Result<LaurentMatrix> {
        let mut out: BTreeMap<i64, MatFp> = BTreeMap::new();
        for (a, x) in &self.coeffs {
            for (b, y) in &other.coeffs {
                let prod = x.mat_mul(y)?;
                let deg = check_degree(a + b)?;
                let e = out.entry(deg).or_insert_with(|| MatFp::zeros(self.p, self.d, self.d));
                *e = e.add(&prod)?;
            }
        }
        Self::new(self.p, self.d, out)
    }

    /// `T z`; a truncation of `z` at `N` gives an output known below
    /// `N + min deg T`.
    pub fn apply(&self, z: &SeriesVector) -> Result<SeriesVector> {
        if z.modulus() != self.p {
            return Err(Error::ModulusMismatch(z.modulus(), self.p));
        }
        if z.dim() != self.d {
            return Err(Error::Dimension("vector and matrix dimensions differ".into()));
        }
        let Some(lo_t) = self.min_degree() else {
            return Ok(SeriesVector::zero(self.p, self.d));
        };
        let prec = z.prec().shifted(lo_t);
        let lo = z.lo() + lo_t;
        let mut acc: BTreeMap<i64, Vec<u32>> = BTreeMap::new();
        for (n, v) in z.terms() {
            for (m, c) in &self.coeffs {
                let deg = n + m;
                if !prec.covers(deg) {
                    continue;
                }
                let w = c.mul_vec(v)?;
                let e = acc.entry(deg).or_insert_with(|| vec![0; self.d]);
                for (a, b) in e.iter_mut().zip(w) {
                    *a = fp::add(self.p, *a, b);
                }
            }
        }
        let lo = match prec {
            Precision::Finite(n) => lo.min(n),
            Precision::Exact => lo,
        };
        SeriesVector::new(self.p, self.d, lo, prec, acc)
    }

    /// The inverse, provided the matrix is lower triangular with monomial
    /// diagonal entries.
    pub fn inverse_lower_triangular(&self) -> Result<LaurentMatrix> {
        let d = self.d;
        let p = self.p;
        let mut diag = Vec::with_capacity(d);
        for k in 0..d {
            for l in 0..k {
                if !self.entry(l, k).is_empty() {
                    return Err(Error::Inconsistent("matrix is not lower triangular".into()));
                }
            }
            let e = self.entry(k, k);
            if e.len() != 1 {
                return Err(Error::Inconsistent(format!("diagonal entry {k} is not a monomial")));
            }
            let (&m, &c) = e.iter().next().expect("one term");
            diag.push((m, fp::inv(p, c)));
        }
        // forward substitution column by column: X = T^{-1}
        let entries: Vec<Vec<BTreeMap<i64, u32>>> =
            (0..d).map(|r| (0..d).map(|c| self.entry(r, c)).collect()).collect();
        let mut x: Vec<Vec<BTreeMap<i64, u32>>> = vec![vec![BTreeMap::new(); d]; d];
        for col in 0..d {
            for row in col..d {
                let mut rhs: BTreeMap<i64, u32> = BTreeMap::new();
                if row == col {
                    rhs.insert(0, 1);
                }
                for l in col..row {
                    for (da, ca) in &entries[row][l] {
                        for (db, cb) in &x[l][col] {
                            let e = rhs.entry(da + db).or_insert(0);
                            *e = fp::sub(p, *e, fp::mul(p, *ca, *cb));
                        }
                    }
                }
                let (m, ic) = diag[row];
                x[row][col] = rhs
                    .into_iter()
                    .filter(|(_, c)| *c != 0)
                    .map(|(deg, c)| (deg - m, fp::mul(p, c, ic)))
                    .collect();
            }
        }
        let mut coeffs: BTreeMap<i64, MatFp> = BTreeMap::new();
        for (row, xr) in x.iter().enumerate() {
            for (col, e) in xr.iter().enumerate() {
                for (deg, c) in e {
                    let m = coeffs.entry(check_degree(*deg)?).or_insert_with(|| MatFp::zeros(p, d, d));
                    m.set(row, col, *c);
                }
            }
        }
        Self::new(p, d, coeffs)
    }

    /// `T A` for a finitely supported block matrix `A`.
    pub fn mul_block(&self, a: &BlockMatrix) -> Result<BlockMatrix> {
        let mut blocks: BTreeMap<(i64, i64), MatFp> = BTreeMap::new();
        for ((i, j), blk) in a.blocks() {
            for (m, c) in &self.coeffs {
                let prod = c.mat_mul(blk)?;
                let e = blocks
                    .entry((check_degree(i + m)?, *j))
                    .or_insert_with(|| MatFp::zeros(self.p, self.d, self.d));
                *e = e.add(&prod)?;
            }
        }
        BlockMatrix::from_blocks(self.p, self.d, blocks)
    }

    /// `A T` for a finitely supported block matrix `A`.
    pub fn block_mul(&self, a: &BlockMatrix) -> Result<BlockMatrix> {
        let mut blocks: BTreeMap<(i64, i64), MatFp> = BTreeMap::new();
        for ((i, j), blk) in a.blocks() {
            for (m, c) in &self.coeffs {
                let prod = blk.mat_mul(c)?;
                let e = blocks
                    .entry((*i, check_degree(j - m)?))
                    .or_insert_with(|| MatFp::zeros(self.p, self.d, self.d));
                *e = e.add(&prod)?;
            }
        }
        BlockMatrix::from_blocks(self.p, self.d, blocks)
    }

    /// `T^{-1} A T` given both factors.
    pub fn conjugate(inverse: &LaurentMatrix, a: &BlockMatrix, t: &LaurentMatrix) -> Result<BlockMatrix> {
        inverse.mul_block(&t.block_mul(a)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangular_inverse() {
        let p = 3;
        // columns b_1 = e_1 t^{-1} + e_2 (2 + t), b_2 = e_2 t^2
        let b1 = SeriesVector::exact(p, 2, [(-1, vec![1, 0]), (0, vec![0, 2]), (1, vec![0, 1])]).unwrap();
        let b2 = SeriesVector::monomial(p, 2, 1, 2, 1);
        let t = LaurentMatrix::from_columns(p, 2, &[b1, b2]).unwrap();
        let ti = t.inverse_lower_triangular().unwrap();
        assert_eq!(t.mul(&ti).unwrap(), LaurentMatrix::identity(p, 2));
        assert_eq!(ti.mul(&t).unwrap(), LaurentMatrix::identity(p, 2));
    }

    #[test]
    fn toeplitz_products_match_block_action() {
        let p = 2;
        let t = LaurentMatrix::new(p, 1, [(1, MatFp::identity(p, 1)), (0, MatFp::identity(p, 1))]).unwrap();
        let a = BlockMatrix::single(p, 1, 0, 0, MatFp::identity(p, 1)).unwrap();
        let z = SeriesVector::monomial(p, 1, 0, 0, 1);
        let lhs = t.mul_block(&a).unwrap().apply(&z).unwrap();
        let rhs = t.apply(&a.apply(&z).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        let lhs = t.block_mul(&a).unwrap().apply(&z).unwrap();
        let rhs = a.apply(&t.apply(&z).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }
}
