//! Vectors in F_p((t))^d known exactly on a degree window.
//!
//! A [`SeriesVector`] is a partial description of a Laurent series vector:
//! every degree below `lo` is zero, every degree in `[lo, prec)` is known, and
//! nothing is claimed at or above `prec`. Operations compute the largest output
//! precision they can justify and never invent coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::endo::CompactOpenSubgroup;
use crate::error::{Error, Result};
use crate::fp::{self, MatFp};

/// Degrees are confined to `[-DEGREE_LIMIT, DEGREE_LIMIT]`.
pub const DEGREE_LIMIT: i64 = 1 << 20;

pub(crate) fn check_degree(n: i64) -> Result<i64> {
    if n.abs() > DEGREE_LIMIT {
        Err(Error::DegreeWindow(n))
    } else {
        Ok(n)
    }
}

/// Upper end of the known window of a series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Precision {
    /// Coefficients are known at every degree below the bound.
    Finite(i64),
    /// Known everywhere; the support is finite.
    Exact,
}

impl Precision {
    pub fn min(self, other: Precision) -> Precision {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Precision::Finite(n) => Some(n),
            Precision::Exact => None,
        }
    }

    /// True iff degree `n` lies in the known range.
    pub fn covers(self, n: i64) -> bool {
        match self {
            Precision::Finite(m) => n < m,
            Precision::Exact => true,
        }
    }

    pub fn shifted(self, n: i64) -> Precision {
        match self {
            Precision::Finite(m) => Precision::Finite(m + n),
            Precision::Exact => Precision::Exact,
        }
    }
}

impl PartialOrd for Precision {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Precision {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Precision::Finite(a), Precision::Finite(b)) => a.cmp(b),
            (Precision::Finite(_), Precision::Exact) => Ordering::Less,
            (Precision::Exact, Precision::Finite(_)) => Ordering::Greater,
            (Precision::Exact, Precision::Exact) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Finite(n) => write!(f, "O(t^{n})"),
            Precision::Exact => write!(f, "exact"),
        }
    }
}

/// An element of F_p((t))^d, exact or truncated.
///
/// Equality compares the known data (modulus, dimension, precision and
/// coefficients); the lower bound `lo` is bookkeeping and is ignored.
#[derive(Clone)]
pub struct SeriesVector {
    p: u32,
    d: usize,
    lo: i64,
    prec: Precision,
    coeffs: BTreeMap<i64, Vec<u32>>,
}

impl PartialEq for SeriesVector {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.d == other.d && self.prec == other.prec && self.coeffs == other.coeffs
    }
}

impl Eq for SeriesVector {}

impl std::hash::Hash for SeriesVector {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        (self.p, self.d, self.prec, &self.coeffs).hash(state);
    }
}

impl fmt::Debug for SeriesVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SeriesVector(p={}, d={}, lo={}, {}, ", self.p, self.d, self.lo, self.prec)?;
        f.debug_map().entries(self.coeffs.iter()).finish()?;
        write!(f, ")")
    }
}

impl fmt::Display for SeriesVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            write!(f, "0")?;
        }
        for (i, (deg, v)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{v:?}*t^{deg}")?;
        }
        if let Precision::Finite(n) = self.prec {
            write!(f, " + O(t^{n})")?;
        }
        Ok(())
    }
}

impl SeriesVector {
    /// Builds a series from explicit data, reducing entries and dropping zeros.
    pub fn new(
        p: u32,
        d: usize,
        lo: i64,
        prec: Precision,
        coeffs: impl IntoIterator<Item = (i64, Vec<u32>)>,
    ) -> Result<Self> {
        check_degree(lo)?;
        if let Precision::Finite(n) = prec {
            check_degree(n)?;
            if n < lo {
                return Err(Error::Precision(format!("precision {n} below lower bound {lo}")));
            }
        }
        let mut map = BTreeMap::new();
        for (deg, v) in coeffs {
            check_degree(deg)?;
            if v.len() != d {
                return Err(Error::Dimension(format!(
                    "coefficient of length {} in dimension {d}",
                    v.len()
                )));
            }
            let v: Vec<u32> = v.into_iter().map(|x| x % p).collect();
            if v.iter().all(|&x| x == 0) {
                continue;
            }
            if deg < lo || !prec.covers(deg) {
                return Err(Error::Precision(format!(
                    "coefficient at degree {deg} outside the known window"
                )));
            }
            map.insert(deg, v);
        }
        Ok(SeriesVector {
            p,
            d,
            lo,
            prec,
            coeffs: map,
        })
    }

    /// Exact vector with the given finite support.
    pub fn exact(p: u32, d: usize, coeffs: impl IntoIterator<Item = (i64, Vec<u32>)>) -> Result<Self> {
        let coeffs: Vec<(i64, Vec<u32>)> = coeffs.into_iter().collect();
        let lo = coeffs.iter().map(|(k, _)| *k).min().unwrap_or(0);
        Self::new(p, d, lo, Precision::Exact, coeffs)
    }

    pub fn zero(p: u32, d: usize) -> Self {
        SeriesVector {
            p,
            d,
            lo: 0,
            prec: Precision::Exact,
            coeffs: BTreeMap::new(),
        }
    }

    /// `c * e_k * t^deg` with `k` zero-based.
    pub fn monomial(p: u32, d: usize, k: usize, deg: i64, c: u32) -> Self {
        let mut v = vec![0; d];
        v[k] = c % p;
        Self::exact(p, d, [(deg, v)]).expect("monomial within window")
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Guaranteed lower support bound.
    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn prec(&self) -> Precision {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec == Precision::Exact
    }

    /// Lowest degree carrying a nonzero coefficient.
    pub fn min_degree(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// Nonzero coefficients in increasing degree.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Vec<u32>)> {
        self.coeffs.iter().map(|(k, v)| (*k, v))
    }

    /// True iff no nonzero coefficient is known.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub(crate) fn coeff_raw(&self, n: i64) -> Option<&Vec<u32>> {
        self.coeffs.get(&n)
    }

    fn check_compatible(&self, other: &SeriesVector) -> Result<()> {
        if self.p != other.p {
            return Err(Error::ModulusMismatch(self.p, other.p));
        }
        if self.d != other.d {
            return Err(Error::Dimension(format!("dimension {} vs {}", self.d, other.d)));
        }
        Ok(())
    }

    /// `tau^n(z)`: every degree moves up by `n`.
    pub fn shift(&self, n: i64) -> Result<SeriesVector> {
        check_degree(self.lo + n)?;
        if let Precision::Finite(m) = self.prec {
            check_degree(m + n)?;
        }
        if let (Some(a), Some(b)) = (self.min_degree(), self.max_degree()) {
            check_degree(a + n)?;
            check_degree(b + n)?;
        }
        Ok(SeriesVector {
            p: self.p,
            d: self.d,
            lo: self.lo + n,
            prec: self.prec.shifted(n),
            coeffs: self.coeffs.iter().map(|(k, v)| (k + n, v.clone())).collect(),
        })
    }

    /// The degree-`n` coefficient.
    pub fn project(&self, n: i64) -> Result<Vec<u32>> {
        if n < self.lo {
            return Ok(vec![0; self.d]);
        }
        if !self.prec.covers(n) {
            return Err(Error::Precision(format!(
                "degree {n} requested from a vector known to {}",
                self.prec
            )));
        }
        Ok(self.coeffs.get(&n).cloned().unwrap_or_else(|| vec![0; self.d]))
    }

    pub fn add(&self, other: &SeriesVector) -> Result<SeriesVector> {
        self.check_compatible(other)?;
        let p = self.p;
        let prec = self.prec.min(other.prec);
        let lo = self.lo.min(other.lo);
        let mut out: BTreeMap<i64, Vec<u32>> = BTreeMap::new();
        for (k, v) in self.coeffs.iter().chain(other.coeffs.iter()) {
            if !prec.covers(*k) {
                continue;
            }
            let e = out.entry(*k).or_insert_with(|| vec![0; self.d]);
            for (a, b) in e.iter_mut().zip(v) {
                *a = fp::add(p, *a, *b);
            }
        }
        out.retain(|_, v| v.iter().any(|&x| x != 0));
        Ok(SeriesVector {
            p,
            d: self.d,
            lo,
            prec,
            coeffs: out,
        })
    }

    pub fn scale(&self, c: u32) -> SeriesVector {
        let p = self.p;
        let c = c % p;
        let mut coeffs: BTreeMap<i64, Vec<u32>> = self
            .coeffs
            .iter()
            .map(|(k, v)| (*k, v.iter().map(|&x| fp::mul(p, x, c)).collect()))
            .collect();
        coeffs.retain(|_, v: &mut Vec<u32>| v.iter().any(|&x| x != 0));
        SeriesVector {
            coeffs,
            ..self.clone()
        }
    }

    pub fn neg(&self) -> SeriesVector {
        self.scale(self.p - 1)
    }

    pub fn sub(&self, other: &SeriesVector) -> Result<SeriesVector> {
        self.add(&other.neg())
    }

    /// Forgets everything at degree `n` and above.
    pub fn truncate(&self, n: i64) -> SeriesVector {
        let prec = self.prec.min(Precision::Finite(n));
        let prec_val = prec.finite();
        let lo = match prec_val {
            Some(m) if m < self.lo => m,
            _ => self.lo,
        };
        SeriesVector {
            p: self.p,
            d: self.d,
            lo,
            prec,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| prec.covers(**k))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    /// Reinterprets a truncated vector as the exact Laurent polynomial given by
    /// its known coefficients.
    pub fn to_exact(&self) -> SeriesVector {
        SeriesVector {
            prec: Precision::Exact,
            ..self.clone()
        }
    }

    /// Raises the lower bound to the first nonzero coefficient (or `prec`).
    pub fn tighten(&self) -> SeriesVector {
        let lo = match (self.min_degree(), self.prec) {
            (Some(m), _) => m,
            (None, Precision::Finite(n)) => n,
            (None, Precision::Exact) => 0,
        };
        SeriesVector {
            lo,
            ..self.clone()
        }
    }

    /// Coefficient-wise agreement on all degrees below `n`.
    pub fn agrees_below(&self, other: &SeriesVector, n: i64) -> bool {
        let a = self.coeffs.range(..n);
        let b = other.coeffs.range(..n);
        a.eq(b)
    }

    /// Equality of the known data on the common window.
    pub fn agrees_on_common_window(&self, other: &SeriesVector) -> bool {
        match self.prec.min(other.prec) {
            Precision::Finite(n) => self.agrees_below(other, n),
            Precision::Exact => self.coeffs == other.coeffs,
        }
    }

    /// Flattened coefficients at degrees `[from, to)`, degree-major.
    pub fn window(&self, from: i64, to: i64) -> Result<Vec<u32>> {
        let mut out = Vec::with_capacity(((to - from).max(0) as usize) * self.d);
        for n in from..to {
            out.extend(self.project(n)?);
        }
        Ok(out)
    }

    /// Exact vector from flattened degree-major coefficients starting at `from`.
    pub fn from_window(p: u32, d: usize, from: i64, flat: &[u32]) -> SeriesVector {
        let coeffs = flat
            .chunks(d)
            .enumerate()
            .map(|(i, c)| (from + i as i64, c.to_vec()));
        SeriesVector::exact(p, d, coeffs).expect("window within degree limit")
    }
}

/// Data of a tidy subgroup `V` together with `d` exact vectors spanning a
/// complement of `tau(V)` in `V`.
#[derive(Clone, Debug)]
pub struct TidyBasisData {
    v: CompactOpenSubgroup,
    b: Vec<SeriesVector>,
    // columns: truncations of b, then a basis of tau(V), in Q_{K+1}
    expansion: MatFp,
}

impl TidyBasisData {
    /// Checks the complement property in the finite quotient and caches the
    /// expansion system.
    pub fn new(v: CompactOpenSubgroup, b: Vec<SeriesVector>) -> Result<Self> {
        let d = v.dim_ambient();
        let p = v.modulus();
        if b.len() != d {
            return Err(Error::Dimension(format!("{} complement vectors for d = {d}", b.len())));
        }
        if !v.is_tau_invariant()? {
            return Err(Error::NotTidy("tau(V) is not contained in V".into()));
        }
        let depth = v.depth() + 1;
        let tv = v.shifted(1)?.embed(depth)?;
        let mut columns = Vec::new();
        for bk in &b {
            if bk.dim() != d || bk.modulus() != p || !bk.is_exact() {
                return Err(Error::Dimension("complement vectors must be exact and compatible".into()));
            }
            if !v.contains_vector(bk)? {
                return Err(Error::Membership("complement vector outside V".into()));
            }
            columns.push(bk.window(-depth, depth)?);
        }
        columns.extend(tv.basis_rows().iter().cloned());
        let n = (2 * depth as usize) * d;
        let expansion = MatFp::from_columns(p, n, &columns);
        let ve = v.embed(depth)?;
        if expansion.rank() != columns.len() || columns.len() != ve.dim() {
            return Err(Error::Membership(
                "vectors do not span a complement of tau(V) in V".into(),
            ));
        }
        Ok(TidyBasisData { v, b, expansion })
    }

    /// The standard data: `V = F_p[[t]]^d` with `b_k = e_k`.
    pub fn standard(p: u32, d: usize) -> Self {
        let b = (0..d).map(|k| SeriesVector::monomial(p, d, k, 0, 1)).collect();
        Self::new(CompactOpenSubgroup::standard(p, d), b).expect("standard data is tidy")
    }

    pub fn subgroup(&self) -> &CompactOpenSubgroup {
        &self.v
    }

    pub fn basis(&self) -> &[SeriesVector] {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// Coefficients of `u in V` on `b` modulo `tau(V)`.
    fn layer_coefficients(&self, u_window: &[u32]) -> Option<Vec<u32>> {
        let x = self.expansion.solve(u_window)?;
        Some(x[..self.b.len()].to_vec())
    }
}

/// Coefficients `n_{j,k}` of an expansion `z = sum n_{j,k} tau^j(b_k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisExpansion {
    /// Nonzero coefficients keyed by `(j, k)` with `k` zero-based.
    pub coeffs: BTreeMap<(i64, usize), u32>,
    /// First level examined; all coefficients below it vanish.
    pub start: i64,
    /// Last level determined.
    pub jmax: i64,
}

impl BasisExpansion {
    pub fn get(&self, j: i64, k: usize) -> u32 {
        self.coeffs.get(&(j, k)).copied().unwrap_or(0)
    }

    /// Largest `j` with every coefficient below `j` zero, capped at `jmax + 1`.
    pub fn valuation(&self) -> i64 {
        self.coeffs.keys().map(|(j, _)| *j).min().unwrap_or(self.jmax + 1)
    }

    /// Direct summation of `sum_{j <= jmax} n_{j,k} tau^j(b_k)`.
    pub fn reconstruct(&self, basis: &TidyBasisData) -> Result<SeriesVector> {
        let b = basis.basis();
        let mut acc = SeriesVector::zero(b[0].modulus(), b[0].dim());
        for ((j, k), c) in &self.coeffs {
            acc = acc.add(&b[*k].shift(*j)?.scale(*c))?;
        }
        Ok(acc)
    }
}

/// Expands `z` on the basis `tau^j(b_k)` through level `jmax`, layer by layer.
///
/// After the call, `z - reconstruct()` lies in `tau^{jmax+1}(V)`.
pub fn basis_expand(z: &SeriesVector, basis: &TidyBasisData, jmax: i64) -> Result<BasisExpansion> {
    let v = basis.subgroup();
    if z.modulus() != v.modulus() {
        return Err(Error::ModulusMismatch(z.modulus(), v.modulus()));
    }
    if z.dim() != v.dim_ambient() {
        return Err(Error::Dimension("vector and subgroup dimensions differ".into()));
    }
    let k_depth = v.depth();
    let depth = k_depth + 1;
    let Some(first) = z.min_degree() else {
        if let Precision::Finite(n) = z.prec() {
            if jmax > n - depth {
                return Err(Error::Precision(format!(
                    "levels up to {jmax} need precision {}, have {n}",
                    jmax + depth
                )));
            }
        }
        return Ok(BasisExpansion {
            coeffs: BTreeMap::new(),
            start: jmax + 1,
            jmax,
        });
    };
    // z in tau^j(V) as soon as tau^{-j} z has no support below K
    let start = check_degree(first - k_depth)?;
    if let Precision::Finite(n) = z.prec() {
        if jmax > n - depth {
            return Err(Error::Precision(format!(
                "levels up to {jmax} need precision {}, have {n}",
                jmax + depth
            )));
        }
    }
    let mut rem = z.clone();
    let mut coeffs = BTreeMap::new();
    for j in start..=jmax {
        if let Some(m) = rem.min_degree() {
            if m < j - k_depth {
                return Err(Error::Membership(format!(
                    "remainder leaves tau^{j}(V) at degree {m}"
                )));
            }
        }
        let u = rem.window(j - depth, j + depth)?;
        let n = basis.layer_coefficients(&u).ok_or_else(|| {
            Error::Membership(format!("remainder not in tau^{j}(V)"))
        })?;
        for (k, &c) in n.iter().enumerate() {
            if c != 0 {
                coeffs.insert((j, k), c);
                rem = rem.sub(&basis.basis()[k].shift(j)?.scale(c))?;
            }
        }
    }
    Ok(BasisExpansion {
        coeffs,
        start,
        jmax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(p: u32, d: usize, k: usize, deg: i64) -> SeriesVector {
        SeriesVector::monomial(p, d, k, deg, 1)
    }

    #[test]
    fn shift_and_project() {
        let z = e(2, 2, 0, 0);
        assert_eq!(z.shift(1).unwrap(), e(2, 2, 0, 1));
        assert_eq!(z.shift(0).unwrap(), z);
        assert_eq!(z.project(0).unwrap(), vec![1, 0]);
        assert_eq!(z.project(5).unwrap(), vec![0, 0]);
        let t = z.truncate(3);
        assert!(matches!(t.project(3), Err(Error::Precision(_))));
        assert_eq!(t.shift(2).unwrap().prec(), Precision::Finite(5));
        assert!(matches!(z.shift(DEGREE_LIMIT + 1), Err(Error::DegreeWindow(_))));
    }

    #[test]
    fn addition_rules() {
        let a = SeriesVector::new(3, 2, 0, Precision::Finite(8), [(1, vec![1, 2]), (6, vec![2, 2])]).unwrap();
        let b = SeriesVector::new(3, 2, -1, Precision::Finite(5), [(-1, vec![1, 0])]).unwrap();
        assert_eq!(a.add(&SeriesVector::zero(3, 2)).unwrap(), a);
        let s = a.add(&b).unwrap();
        assert_eq!(s.prec(), Precision::Finite(5));
        assert_eq!(s.lo(), -1);
        assert!(a.add(&a.scale(2)).unwrap().is_zero());
        assert!(matches!(a.add(&e(5, 2, 0, 0)), Err(Error::ModulusMismatch(3, 5))));
        assert!(matches!(a.add(&e(3, 1, 0, 0)), Err(Error::Dimension(_))));
    }

    #[test]
    fn standard_expansion() {
        let basis = TidyBasisData::standard(2, 2);
        let z = e(2, 2, 0, 0).add(&e(2, 2, 1, 1)).unwrap();
        let ex = basis_expand(&z, &basis, 4).unwrap();
        assert_eq!(ex.get(0, 0), 1);
        assert_eq!(ex.get(1, 1), 1);
        assert_eq!(ex.coeffs.len(), 2);
        let zero = basis_expand(&SeriesVector::zero(2, 2), &basis, 4).unwrap();
        assert!(zero.coeffs.is_empty());
    }

    #[test]
    fn expansion_needs_precision() {
        let basis = TidyBasisData::standard(3, 1);
        let z = e(3, 1, 0, 0).truncate(4);
        assert!(basis_expand(&z, &basis, 2).is_ok());
        assert!(matches!(basis_expand(&z, &basis, 3), Err(Error::Precision(_))));
    }
}
