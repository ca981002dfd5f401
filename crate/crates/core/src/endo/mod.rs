//! Block-matrix calculus for continuous endomorphisms of F_p((t))^d.
//!
//! An endomorphism `A` corresponds to the grid of `d x d` blocks
//! `A_{i,j} = pi_i o A |_{V_j}`. Finite grids are stored as [`BlockMatrix`];
//! everything else is a [`LazyEndo`] evaluated on demand.

mod subgroup;
mod toeplitz;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub use subgroup::{CompactOpenSubgroup, MAX_DEPTH};
pub use toeplitz::LaurentMatrix;

use crate::error::{Error, Result};
use crate::fp::{self, MatFp};
use crate::laurent::{basis_expand, check_degree, Precision, SeriesVector, TidyBasisData};

/// A finitely supported block matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BlockMatrix {
    p: u32,
    d: usize,
    blocks: BTreeMap<(i64, i64), MatFp>,
}

impl fmt::Debug for BlockMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BlockMatrix(p={}, d={}) ", self.p, self.d)?;
        f.debug_map()
            .entries(self.blocks.iter().map(|(k, v)| (k, v.to_rows())))
            .finish()
    }
}

/// Bounds of the support of a nonzero block matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub i_min: i64,
    pub i_max: i64,
    pub j_min: i64,
    pub j_max: i64,
}

impl BlockMatrix {
    pub fn zero(p: u32, d: usize) -> Self {
        BlockMatrix {
            p,
            d,
            blocks: BTreeMap::new(),
        }
    }

    pub fn from_blocks(p: u32, d: usize, blocks: impl IntoIterator<Item = ((i64, i64), MatFp)>) -> Result<Self> {
        fp::check_prime(p)?;
        let mut map = BTreeMap::new();
        for ((i, j), m) in blocks {
            check_degree(i)?;
            check_degree(j)?;
            if m.modulus() != p {
                return Err(Error::ModulusMismatch(m.modulus(), p));
            }
            if m.rows() != d || m.cols() != d {
                return Err(Error::Dimension(format!(
                    "block ({i},{j}) is {}x{}, expected {d}x{d}",
                    m.rows(),
                    m.cols()
                )));
            }
            if !m.is_zero() {
                map.insert((i, j), m);
            }
        }
        Ok(BlockMatrix { p, d, blocks: map })
    }

    pub fn single(p: u32, d: usize, i: i64, j: i64, m: MatFp) -> Result<Self> {
        Self::from_blocks(p, d, [((i, j), m)])
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn blocks(&self) -> &BTreeMap<(i64, i64), MatFp> {
        &self.blocks
    }

    /// The block at `(i, j)`, zero outside the support.
    pub fn get(&self, i: i64, j: i64) -> MatFp {
        self.blocks
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(|| MatFp::zeros(self.p, self.d, self.d))
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn window(&self) -> Option<Window> {
        if self.blocks.is_empty() {
            return None;
        }
        let mut w = Window {
            i_min: i64::MAX,
            i_max: i64::MIN,
            j_min: i64::MAX,
            j_max: i64::MIN,
        };
        for &(i, j) in self.blocks.keys() {
            w.i_min = w.i_min.min(i);
            w.i_max = w.i_max.max(i);
            w.j_min = w.j_min.min(j);
            w.j_max = w.j_max.max(j);
        }
        Some(w)
    }

    /// Extremes of `i - j` over the support.
    pub fn offset_range(&self) -> Option<(i64, i64)> {
        let lo = self.blocks.keys().map(|(i, j)| i - j).min()?;
        let hi = self.blocks.keys().map(|(i, j)| i - j).max()?;
        Some((lo, hi))
    }

    fn check_compatible(&self, other: &BlockMatrix) -> Result<()> {
        if self.p != other.p {
            return Err(Error::ModulusMismatch(self.p, other.p));
        }
        if self.d != other.d {
            return Err(Error::Dimension(format!("block size {} vs {}", self.d, other.d)));
        }
        Ok(())
    }

    pub fn add(&self, other: &BlockMatrix) -> Result<BlockMatrix> {
        self.check_compatible(other)?;
        let mut blocks = self.blocks.clone();
        for (k, m) in &other.blocks {
            let e = blocks
                .entry(*k)
                .or_insert_with(|| MatFp::zeros(self.p, self.d, self.d));
            *e = e.add(m)?;
        }
        blocks.retain(|_, m| !m.is_zero());
        Ok(BlockMatrix { blocks, ..self.clone() })
    }

    pub fn neg(&self) -> BlockMatrix {
        BlockMatrix {
            blocks: self.blocks.iter().map(|(k, m)| (*k, m.neg())).collect(),
            ..self.clone()
        }
    }

    pub fn sub(&self, other: &BlockMatrix) -> Result<BlockMatrix> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: u32) -> BlockMatrix {
        let mut blocks: BTreeMap<(i64, i64), MatFp> =
            self.blocks.iter().map(|(k, m)| (*k, m.scale(c))).collect();
        blocks.retain(|_, m| !m.is_zero());
        BlockMatrix { blocks, ..self.clone() }
    }

    /// `pi_i(Az) = sum_j A_{i,j} pi_j(z)`, emitted only where determined.
    pub fn apply(&self, z: &SeriesVector) -> Result<SeriesVector> {
        if z.modulus() != self.p {
            return Err(Error::ModulusMismatch(z.modulus(), self.p));
        }
        if z.dim() != self.d {
            return Err(Error::Dimension(format!("vector of dimension {} for blocks of size {}", z.dim(), self.d)));
        }
        let undetermined = match z.prec() {
            Precision::Finite(n) => self
                .blocks
                .keys()
                .filter(|(_, j)| *j >= n)
                .map(|(i, _)| *i)
                .min(),
            Precision::Exact => None,
        };
        let prec = match undetermined {
            Some(i) => Precision::Finite(i),
            None => Precision::Exact,
        };
        let mut acc: BTreeMap<i64, Vec<u32>> = BTreeMap::new();
        for ((i, j), m) in &self.blocks {
            if !prec.covers(*i) {
                continue;
            }
            let Some(v) = z.coeff_raw(*j) else { continue };
            let w = m.mul_vec(v)?;
            let e = acc.entry(*i).or_insert_with(|| vec![0; self.d]);
            for (a, b) in e.iter_mut().zip(w) {
                *a = fp::add(self.p, *a, b);
            }
        }
        let lo = self
            .blocks
            .keys()
            .filter(|(_, j)| *j >= z.lo())
            .map(|(i, _)| *i)
            .min()
            .unwrap_or(0);
        let lo = match prec {
            Precision::Finite(n) => lo.min(n),
            Precision::Exact => lo,
        };
        SeriesVector::new(self.p, self.d, lo, prec, acc)
    }

    /// `(AB)_{i,k} = sum_j A_{i,j} B_{j,k}`.
    pub fn compose(&self, other: &BlockMatrix) -> Result<BlockMatrix> {
        self.check_compatible(other)?;
        let mut by_row: BTreeMap<i64, Vec<(i64, &MatFp)>> = BTreeMap::new();
        for ((j, k), m) in &other.blocks {
            by_row.entry(*j).or_default().push((*k, m));
        }
        let mut out: BTreeMap<(i64, i64), MatFp> = BTreeMap::new();
        for ((i, j), a) in &self.blocks {
            let Some(row) = by_row.get(j) else { continue };
            for (k, b) in row {
                let prod = a.mat_mul(b)?;
                let e = out
                    .entry((*i, *k))
                    .or_insert_with(|| MatFp::zeros(self.p, self.d, self.d));
                *e = e.add(&prod)?;
            }
        }
        out.retain(|_, m| !m.is_zero());
        Ok(BlockMatrix {
            p: self.p,
            d: self.d,
            blocks: out,
        })
    }

    /// `A^{(r)}`, the conjugate `tau^r A tau^{-r}`: block `(i, j)` moves to
    /// `(i + r, j + r)`.
    pub fn shift_conjugate(&self, r: i64) -> Result<BlockMatrix> {
        let mut blocks = BTreeMap::new();
        for ((i, j), m) in &self.blocks {
            blocks.insert((check_degree(i + r)?, check_degree(j + r)?), m.clone());
        }
        Ok(BlockMatrix { blocks, ..self.clone() })
    }

    /// `(I + A)(I + B) - I = A + B + AB`.
    pub fn unipotent_product(&self, other: &BlockMatrix) -> Result<BlockMatrix> {
        self.add(other)?.add(&self.compose(other)?)
    }

    /// `(I + A)^e - I`.
    pub fn unipotent_power(&self, e: u64) -> Result<BlockMatrix> {
        let mut acc = BlockMatrix::zero(self.p, self.d);
        for _ in 0..e {
            acc = acc.unipotent_product(self)?;
        }
        Ok(acc)
    }

    /// `I + A` applied to `z`.
    pub fn apply_unipotent(&self, z: &SeriesVector) -> Result<SeriesVector> {
        z.add(&self.apply(z)?)
    }

    /// True iff `A_{i,j} = 0` whenever `i < j`.
    pub fn is_lower_triangular(&self) -> bool {
        self.blocks.keys().all(|(i, j)| i >= j)
    }
}

/// Where a [`LazyEndo`] came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Finite,
    Laurent,
    Constructed,
    ChangeOfBasis,
    Custom(String),
}

type Evaluator = Arc<dyn Fn(&SeriesVector, i64) -> Result<SeriesVector> + Send + Sync>;
type BlockOracle = Arc<dyn Fn(i64, i64) -> Result<MatFp> + Send + Sync>;

/// An endomorphism known through an evaluator and a block oracle.
#[derive(Clone)]
pub struct LazyEndo {
    p: u32,
    d: usize,
    eval: Evaluator,
    block: BlockOracle,
    provenance: Provenance,
}

impl fmt::Debug for LazyEndo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LazyEndo(p={}, d={}, {:?})", self.p, self.d, self.provenance)
    }
}

impl LazyEndo {
    /// An endomorphism from user-supplied closures; `eval(z, n)` must return
    /// the image known at least below degree `n`.
    pub fn custom(
        p: u32,
        d: usize,
        tag: &str,
        eval: impl Fn(&SeriesVector, i64) -> Result<SeriesVector> + Send + Sync + 'static,
        block: impl Fn(i64, i64) -> Result<MatFp> + Send + Sync + 'static,
    ) -> Self {
        LazyEndo {
            p,
            d,
            eval: Arc::new(eval),
            block: Arc::new(block),
            provenance: Provenance::Custom(tag.to_string()),
        }
    }

    pub fn from_blocks(a: &BlockMatrix) -> Self {
        let ae = a.clone();
        let ab = a.clone();
        LazyEndo {
            p: a.p,
            d: a.d,
            eval: Arc::new(move |z, n| Ok(ae.apply(z)?.truncate(n))),
            block: Arc::new(move |i, j| Ok(ab.get(i, j))),
            provenance: Provenance::Finite,
        }
    }

    pub fn from_laurent(t: &LaurentMatrix, p: u32, d: usize) -> Self {
        let te = t.clone();
        let tb = t.clone();
        LazyEndo {
            p,
            d,
            eval: Arc::new(move |z, n| Ok(te.apply(z)?.truncate(n))),
            block: Arc::new(move |i, j| {
                Ok(tb
                    .coeffs()
                    .get(&(i - j))
                    .cloned()
                    .unwrap_or_else(|| MatFp::zeros(p, d, d)))
            }),
            provenance: Provenance::Laurent,
        }
    }

    /// Wraps an evaluator; blocks are read off images of monomials.
    fn with_block_oracle(p: u32, d: usize, eval: Evaluator, provenance: Provenance) -> Self {
        let e = eval.clone();
        LazyEndo {
            p,
            d,
            eval,
            block: Arc::new(move |i, j| block_from_eval(&e, p, d, i, j)),
            provenance,
        }
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// The image of `z`, known below `target` (or to the largest precision the
    /// evaluator can justify, if smaller).
    pub fn apply(&self, z: &SeriesVector, target: i64) -> Result<SeriesVector> {
        if z.modulus() != self.p {
            return Err(Error::ModulusMismatch(z.modulus(), self.p));
        }
        if z.dim() != self.d {
            return Err(Error::Dimension("vector and endomorphism dimensions differ".into()));
        }
        (self.eval)(z, target)
    }

    /// `A_{i,j} = pi_i o A |_{V_j}`.
    pub fn block(&self, i: i64, j: i64) -> Result<MatFp> {
        (self.block)(i, j)
    }

    /// Composition `self o other`, evaluated lazily.
    pub fn compose(&self, other: &LazyEndo) -> LazyEndo {
        let (f, g) = (self.clone(), other.clone());
        let p = self.p;
        let d = self.d;
        let (fe, ge) = (f.clone(), g.clone());
        let eval = move |z: &SeriesVector, n: i64| -> Result<SeriesVector> {
            // ask the inner map for a little more until the outer one is satisfied
            let mut extra = 0;
            loop {
                let inner = ge.apply(z, n + extra)?;
                let out = fe.apply(&inner, n)?;
                if out.prec() >= Precision::Finite(n) || extra > 4 * MAX_DEPTH {
                    return Ok(out);
                }
                extra = 2 * extra + 1;
            }
        };
        LazyEndo::with_block_oracle(p, d, Arc::new(eval), Provenance::Custom("composition".into()))
    }
}

fn block_from_eval(eval: &Evaluator, p: u32, d: usize, i: i64, j: i64) -> Result<MatFp> {
    let mut cols = Vec::with_capacity(d);
    for k in 0..d {
        let img = eval(&SeriesVector::monomial(p, d, k, j, 1), i + 1)?;
        cols.push(img.project(i)?);
    }
    Ok(MatFp::from_columns(p, d, &cols))
}

/// A sequence `n -> w_n` together with a certificate `n0` such that every
/// `w_n` with `n >= n0(D)` vanishes below degree `D + 1`.
#[derive(Clone)]
pub struct NullSequence {
    w: Arc<dyn Fn(i64) -> Result<SeriesVector> + Send + Sync>,
    n0: Arc<dyn Fn(i64) -> i64 + Send + Sync>,
}

impl NullSequence {
    pub fn new(
        w: impl Fn(i64) -> Result<SeriesVector> + Send + Sync + 'static,
        n0: impl Fn(i64) -> i64 + Send + Sync + 'static,
    ) -> Self {
        NullSequence {
            w: Arc::new(w),
            n0: Arc::new(n0),
        }
    }

    pub fn term(&self, n: i64) -> Result<SeriesVector> {
        (self.w)(n)
    }

    pub fn cutoff(&self, degree: i64) -> i64 {
        (self.n0)(degree)
    }
}

/// The endomorphism sending `z = sum n_{j,k} tau^j(b_k)` to
/// `sum n_{j,k} w_{k + jd}`.
pub fn make_endo(basis: &TidyBasisData, w: NullSequence) -> LazyEndo {
    let p = basis.subgroup().modulus();
    let d = basis.dim();
    let data = basis.clone();
    let eval = move |z: &SeriesVector, target: i64| -> Result<SeriesVector> {
        let cut = w.cutoff(target - 1);
        let jmax = (cut - 1).div_euclid(d as i64);
        let ex = basis_expand(z, &data, jmax)?;
        let mut acc = SeriesVector::zero(p, d).truncate(target);
        for ((j, k), c) in &ex.coeffs {
            let n = *k as i64 + j * d as i64;
            let wn = w.term(n)?;
            if !wn.prec().covers(target - 1) {
                return Err(Error::Precision(format!(
                    "w_{n} known to {}, needed below {target}",
                    wn.prec()
                )));
            }
            acc = acc.add(&wn.scale(*c).truncate(target))?;
        }
        // spot-check the certificate just past the cut
        for n in cut..cut + d as i64 {
            let wn = w.term(n)?;
            if wn.min_degree().is_some_and(|m| m < target) {
                return Err(Error::Certificate(format!(
                    "w_{n} has support below {target} although n >= n0({})",
                    target - 1
                )));
            }
        }
        Ok(acc)
    };
    LazyEndo::with_block_oracle(p, d, Arc::new(eval), Provenance::Constructed)
}

/// Outcome of one tail condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MStatus {
    Pass,
    Fail { i: i64, j: i64 },
    Inconclusive(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MReport {
    pub m1: MStatus,
    pub m2: MStatus,
    pub m3: MStatus,
}

impl MReport {
    pub fn all_pass(&self) -> bool {
        [&self.m1, &self.m2, &self.m3].iter().all(|s| **s == MStatus::Pass)
    }
}

/// Claimed tail witnesses: `J_i` (M1), `I_j` (M2) and the corner `(I, J)` (M3).
#[derive(Clone)]
pub struct MWitnesses {
    pub row_bound: Arc<dyn Fn(i64) -> i64 + Send + Sync>,
    pub col_bound: Arc<dyn Fn(i64) -> i64 + Send + Sync>,
    pub corner: (i64, i64),
}

/// Input to [`check_m_conditions`].
pub enum MInput<'a> {
    Finite(&'a BlockMatrix),
    Lazy {
        endo: &'a LazyEndo,
        /// Half-open ranges of rows and columns to inspect.
        rows: (i64, i64),
        cols: (i64, i64),
        witnesses: MWitnesses,
    },
}

/// Verifies the tail conditions M1-M3 on the inspected window.
pub fn check_m_conditions(input: &MInput<'_>) -> Result<MReport> {
    let (endo, rows, cols, w) = match input {
        MInput::Finite(_) => {
            return Ok(MReport {
                m1: MStatus::Pass,
                m2: MStatus::Pass,
                m3: MStatus::Pass,
            })
        }
        MInput::Lazy {
            endo,
            rows,
            cols,
            witnesses,
        } => (*endo, *rows, *cols, witnesses),
    };
    let mut cache: BTreeMap<(i64, i64), bool> = BTreeMap::new();
    let mut nonzero = |i: i64, j: i64| -> Result<bool> {
        if let Some(b) = cache.get(&(i, j)) {
            return Ok(*b);
        }
        let b = !endo.block(i, j)?.is_zero();
        cache.insert((i, j), b);
        Ok(b)
    };
    let mut run = |cells: Vec<(i64, i64)>, what: &str| -> Result<MStatus> {
        if cells.is_empty() {
            return Ok(MStatus::Inconclusive(format!("window too small to test {what}")));
        }
        for (i, j) in cells {
            if nonzero(i, j)? {
                return Ok(MStatus::Fail { i, j });
            }
        }
        Ok(MStatus::Pass)
    };
    let m1_cells: Vec<(i64, i64)> = (rows.0..rows.1)
        .flat_map(|i| {
            let jb = (w.row_bound)(i);
            ((jb + 1).max(cols.0)..cols.1).map(move |j| (i, j))
        })
        .collect();
    let m2_cells: Vec<(i64, i64)> = (cols.0..cols.1)
        .flat_map(|j| {
            let ib = (w.col_bound)(j);
            (rows.0..ib.min(rows.1)).map(move |i| (i, j))
        })
        .collect();
    let (ci, cj) = w.corner;
    let m3_cells: Vec<(i64, i64)> = (rows.0..ci.min(rows.1))
        .flat_map(|i| ((cj + 1).max(cols.0)..cols.1).map(move |j| (i, j)))
        .collect();
    Ok(MReport {
        m1: run(m1_cells, "M1")?,
        m2: run(m2_cells, "M2")?,
        m3: run(m3_cells, "M3")?,
    })
}

/// `theta` with `theta(F_p[[t]]^d) = V` and `theta o tau = tau o theta`,
/// together with its inverse, both as lazy maps built from tidy data and as
/// exact Laurent-polynomial matrices.
#[derive(Clone, Debug)]
pub struct ChangeOfBasis {
    pub basis: TidyBasisData,
    pub theta: LazyEndo,
    pub theta_inv: LazyEndo,
    pub matrix: LaurentMatrix,
    pub inverse: LaurentMatrix,
}

impl ChangeOfBasis {
    /// Conjugates a finite block matrix: `theta^{-1} A theta`.
    pub fn pull_back(&self, a: &BlockMatrix) -> Result<BlockMatrix> {
        LaurentMatrix::conjugate(&self.inverse, a, &self.matrix)
    }

    /// `theta A theta^{-1}`.
    pub fn push_forward(&self, a: &BlockMatrix) -> Result<BlockMatrix> {
        LaurentMatrix::conjugate(&self.matrix, a, &self.inverse)
    }
}

pub fn change_basis(v: &CompactOpenSubgroup) -> Result<ChangeOfBasis> {
    let basis = v.complement_basis()?;
    let p = v.modulus();
    let d = v.dim_ambient();
    let depth = v.depth();
    let di = d as i64;

    let b = basis.basis().to_vec();
    let forward = NullSequence::new(
        move |n| {
            let (j, k) = (n.div_euclid(di), n.rem_euclid(di) as usize);
            b[k].shift(j)
        },
        move |deg| (deg + depth + 1) * di,
    );
    let mut theta = make_endo(&TidyBasisData::standard(p, d), forward);
    theta.provenance = Provenance::ChangeOfBasis;

    let backward = NullSequence::new(
        move |n| {
            let (j, k) = (n.div_euclid(di), n.rem_euclid(di) as usize);
            Ok(SeriesVector::monomial(p, d, k, j, 1))
        },
        move |deg| (deg + 1) * di,
    );
    let mut theta_inv = make_endo(&basis, backward);
    theta_inv.provenance = Provenance::ChangeOfBasis;

    let matrix = LaurentMatrix::from_columns(p, d, basis.basis())?;
    let inverse = matrix.inverse_lower_triangular()?;
    Ok(ChangeOfBasis {
        basis,
        theta,
        theta_inv,
        matrix,
        inverse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e_mat() -> MatFp {
        MatFp::from_rows(2, &[vec![0, 1], vec![0, 0]]).unwrap()
    }

    fn e2() -> BlockMatrix {
        BlockMatrix::single(2, 2, 1, 0, e_mat()).unwrap()
    }

    #[test]
    fn one_block_evaluation() {
        let out = e2().apply(&SeriesVector::monomial(2, 2, 1, 0, 1)).unwrap();
        assert_eq!(out, SeriesVector::monomial(2, 2, 0, 1, 1));
        assert!(BlockMatrix::zero(2, 2)
            .apply(&SeriesVector::monomial(2, 2, 1, 0, 1))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn composition_examples() {
        let a = e2();
        assert!(a.compose(&a).unwrap().is_zero());
        assert!(a.compose(&BlockMatrix::zero(2, 2)).unwrap().is_zero());
        // the only product lands at (1, -1) with block E^2 = 0
        assert!(a.compose(&a.shift_conjugate(-1).unwrap()).unwrap().is_zero());
        let b = BlockMatrix::single(2, 2, 0, -1, MatFp::identity(2, 2)).unwrap();
        let ab = a.compose(&b).unwrap();
        assert_eq!(ab.blocks().keys().collect::<Vec<_>>(), vec![&(1, -1)]);
    }

    #[test]
    fn shift_conjugation() {
        let a = e2();
        assert_eq!(a.shift_conjugate(0).unwrap(), a);
        let s = a.shift_conjugate(3).unwrap();
        assert_eq!(s.blocks().keys().collect::<Vec<_>>(), vec![&(4, 3)]);
        let z = SeriesVector::exact(2, 2, [(-3, vec![0, 1]), (0, vec![1, 1])]).unwrap();
        let lhs = s.apply(&z).unwrap();
        let rhs = a.apply(&z.shift(-3).unwrap()).unwrap().shift(3).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn apply_precision_rule() {
        let a = BlockMatrix::from_blocks(
            3,
            1,
            [((0, 2), MatFp::identity(3, 1)), ((5, 1), MatFp::identity(3, 1))],
        )
        .unwrap();
        let z = SeriesVector::monomial(3, 1, 0, 1, 1).truncate(2);
        let out = a.apply(&z).unwrap();
        // row 0 needs degree 2, which is unknown
        assert_eq!(out.prec(), Precision::Finite(0));
        let z = SeriesVector::monomial(3, 1, 0, 1, 1).truncate(3);
        assert_eq!(a.apply(&z).unwrap().prec(), Precision::Exact);
    }

    #[test]
    fn make_endo_identity_and_zero() {
        let p = 3;
        let d = 2;
        let std = TidyBasisData::standard(p, d);
        let id = make_endo(
            &std,
            NullSequence::new(
                move |n| Ok(SeriesVector::monomial(p, d, n.rem_euclid(2) as usize, n.div_euclid(2), 1)),
                |deg| (deg + 1) * 2,
            ),
        );
        let z = SeriesVector::exact(p, d, [(-2, vec![1, 2]), (3, vec![0, 1])]).unwrap();
        assert_eq!(id.apply(&z, 10).unwrap(), z.truncate(10));
        let zero = make_endo(&std, NullSequence::new(move |_| Ok(SeriesVector::zero(p, d)), |_| i64::MIN / 4));
        assert!(zero.apply(&z, 10).unwrap().is_zero());
    }

    #[test]
    fn make_endo_reproduces_blocks() {
        let p = 2;
        let d = 2;
        let a = BlockMatrix::from_blocks(
            p,
            d,
            [((1, 0), e_mat()), ((-1, 2), MatFp::identity(p, d)), ((0, 0), e_mat())],
        )
        .unwrap();
        let ac = a.clone();
        let jmax = a.window().unwrap().j_max;
        let w = NullSequence::new(
            move |n| {
                let (j, k) = (n.div_euclid(2), n.rem_euclid(2) as usize);
                ac.apply(&SeriesVector::monomial(p, d, k, j, 1))
            },
            move |_| (jmax + 1) * 2,
        );
        let lazy = make_endo(&TidyBasisData::standard(p, d), w);
        for i in -3..4 {
            for j in -3..4 {
                assert_eq!(lazy.block(i, j).unwrap(), a.get(i, j), "block ({i},{j})");
            }
        }
    }

    #[test]
    fn violated_certificate_is_reported() {
        let p = 2;
        let lazy = make_endo(
            &TidyBasisData::standard(p, 1),
            NullSequence::new(move |_| Ok(SeriesVector::monomial(p, 1, 0, 0, 1)), |deg| deg + 1),
        );
        let z = SeriesVector::monomial(p, 1, 0, 0, 1);
        assert!(matches!(lazy.apply(&z, 1), Err(Error::Certificate(_))));
    }

    #[test]
    fn m_conditions() {
        let a = e2();
        assert!(check_m_conditions(&MInput::Finite(&a)).unwrap().all_pass());
        let lazy = LazyEndo::from_blocks(&a);
        let w = MWitnesses {
            row_bound: Arc::new(|i| i - 1),
            col_bound: Arc::new(|j| j + 1),
            corner: (0, 0),
        };
        let report = check_m_conditions(&MInput::Lazy {
            endo: &lazy,
            rows: (-4, 4),
            cols: (-4, 4),
            witnesses: w.clone(),
        })
        .unwrap();
        assert!(report.all_pass(), "{report:?}");
        // corrupted oracle with a block at (-2, 3)
        let corrupt = LazyEndo::custom(
            2,
            2,
            "corrupt",
            |z, _| Ok(z.clone()),
            |i, j| {
                Ok(if (i, j) == (-2, 3) {
                    MatFp::identity(2, 2)
                } else {
                    MatFp::zeros(2, 2, 2)
                })
            },
        );
        let report = check_m_conditions(&MInput::Lazy {
            endo: &corrupt,
            rows: (-4, 4),
            cols: (-4, 4),
            witnesses: w.clone(),
        })
        .unwrap();
        assert_eq!(report.m3, MStatus::Fail { i: -2, j: 3 });
        let tiny = check_m_conditions(&MInput::Lazy {
            endo: &lazy,
            rows: (0, 1),
            cols: (0, 1),
            witnesses: w,
        })
        .unwrap();
        assert!(matches!(tiny.m3, MStatus::Inconclusive(_)));
    }

    #[test]
    fn change_basis_standard_and_shifted() {
        let p = 2;
        let cb = change_basis(&CompactOpenSubgroup::standard(p, 2)).unwrap();
        assert_eq!(cb.matrix, LaurentMatrix::identity(p, 2));
        let z = SeriesVector::exact(p, 2, [(0, vec![1, 1]), (4, vec![0, 1])]).unwrap();
        assert_eq!(cb.theta.apply(&z, 12).unwrap(), z.truncate(12));

        let v = CompactOpenSubgroup::lattice(p, 2, 1).unwrap();
        let cb = change_basis(&v).unwrap();
        let img = cb.theta.apply(&z, 12).unwrap();
        assert_eq!(img, z.shift(1).unwrap().truncate(12));
        assert!(v.contains_vector(&img).unwrap());
        let back = cb.theta_inv.apply(&img, 10).unwrap();
        assert_eq!(back, z.truncate(10));
    }
}
