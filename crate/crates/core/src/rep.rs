//! Representations `phi` of `(F_p((t)), +)` on F_p((t))^d intertwining the
//! shift, described by the generator `A0 = phi(t^0) - I`.
//!
//! `phi(sum c_r t^r) = prod_r (I + A0^{(r)})^{c_r}`, which is well defined
//! once `(I + A0)^p = I` and all shifts of `A0` commute.

use std::collections::{BTreeMap, BTreeSet};

use crate::endo::{change_basis, BlockMatrix, ChangeOfBasis, CompactOpenSubgroup, LaurentMatrix, MAX_DEPTH};
use crate::error::{Error, Result};
use crate::fp::MatFp;
use crate::laurent::{Precision, SeriesVector};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validity {
    Unchecked,
    Valid,
    Invalid(String),
}

/// First failure found by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Counterexample {
    /// `(I + A0)^p - I` has a nonzero block at `(i, j)`.
    Order { i: i64, j: i64 },
    /// `A0 A0^{(r)} - A0^{(r)} A0` has a nonzero block at `(i, j)`.
    Commutation { r: i64, i: i64, j: i64 },
}

impl std::fmt::Display for Counterexample {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Counterexample::Order { i, j } => write!(f, "(I + A0)^p - I has a nonzero block at ({i}, {j})"),
            Counterexample::Commutation { r, i, j } => {
                write!(f, "A0 does not commute with its shift r = {r}: block ({i}, {j}) of the commutator is nonzero")
            }
        }
    }
}

impl ValidationReport {
    fn reason(&self) -> String {
        self.counterexample.as_ref().map_or_else(|| "invalid".into(), |c| c.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub valid: bool,
    pub order_ok: bool,
    /// Inclusive range of `r` checked for commutation; outside it both
    /// products vanish for support reasons.
    pub commutation_range: Option<(i64, i64)>,
    pub counterexample: Option<Counterexample>,
}

/// A representation given by its generator.
#[derive(Clone, Debug)]
pub struct Rep {
    a0: BlockMatrix,
    validity: Validity,
}

impl PartialEq for Rep {
    fn eq(&self, other: &Self) -> bool {
        self.a0 == other.a0
    }
}

impl Rep {
    /// An unchecked representation.
    pub fn new(a0: BlockMatrix) -> Self {
        Rep {
            a0,
            validity: Validity::Unchecked,
        }
    }

    /// Validates and fails with the first counterexample if invalid.
    pub fn checked(a0: BlockMatrix) -> Result<Self> {
        let report = validate(&Rep::new(a0.clone()));
        if report.valid {
            Ok(Rep {
                a0,
                validity: Validity::Valid,
            })
        } else {
            Err(Error::InvalidRep(report.reason()))
        }
    }

    pub fn trivial(p: u32, d: usize) -> Self {
        Rep::checked(BlockMatrix::zero(p, d)).expect("zero generator is valid")
    }

    pub fn generator(&self) -> &BlockMatrix {
        &self.a0
    }

    pub fn modulus(&self) -> u32 {
        self.a0.modulus()
    }

    pub fn dim(&self) -> usize {
        self.a0.dim()
    }

    pub fn validity(&self) -> &Validity {
        &self.validity
    }

    pub(crate) fn require_valid(&self) -> Result<()> {
        match &self.validity {
            Validity::Valid => Ok(()),
            Validity::Invalid(r) => Err(Error::InvalidRep(r.clone())),
            Validity::Unchecked => {
                let report = validate(self);
                if report.valid {
                    Ok(())
                } else {
                    Err(Error::InvalidRep(report.reason()))
                }
            }
        }
    }

    /// `theta^{-1} phi theta` for a change of basis.
    pub fn conjugate(&self, cb: &ChangeOfBasis) -> Result<Rep> {
        self.conjugate_by(&cb.matrix, &cb.inverse)
    }

    pub(crate) fn conjugate_by(&self, theta: &LaurentMatrix, inverse: &LaurentMatrix) -> Result<Rep> {
        Rep::checked(LaurentMatrix::conjugate(inverse, &self.a0, theta)?)
    }

    /// `A0^{(r)}`.
    pub fn shifted_generator(&self, r: i64) -> Result<BlockMatrix> {
        self.a0.shift_conjugate(r)
    }

    /// True iff every `phi(f)` is lower triangular.
    pub fn is_lower_triangular(&self) -> bool {
        self.a0.is_lower_triangular()
    }
}

/// Checks `(I + A0)^p = I` and `[A0, A0^{(r)}] = 0` on the range of `r`
/// where either product can be nonzero.
pub fn validate(rep: &Rep) -> ValidationReport {
    let a = &rep.a0;
    let p = a.modulus();
    let Some(w) = a.window() else {
        return ValidationReport {
            valid: true,
            order_ok: true,
            commutation_range: None,
            counterexample: None,
        };
    };
    let order = a.unipotent_power(p as u64).expect("compatible blocks");
    if let Some(&(i, j)) = order.blocks().keys().next() {
        return ValidationReport {
            valid: false,
            order_ok: false,
            commutation_range: None,
            counterexample: Some(Counterexample::Order { i, j }),
        };
    }
    // A A^{(r)} needs r in [jMin - iMax, jMax - iMin];
    // A^{(r)} A needs r in [iMin - jMax, iMax - jMin]
    let lo = (w.j_min - w.i_max).min(w.i_min - w.j_max);
    let hi = (w.j_max - w.i_min).max(w.i_max - w.j_min);
    for r in lo..=hi {
        let s = a.shift_conjugate(r).expect("window");
        let c = a
            .compose(&s)
            .and_then(|x| x.sub(&s.compose(a)?))
            .expect("compatible blocks");
        if let Some(&(i, j)) = c.blocks().keys().next() {
            return ValidationReport {
                valid: false,
                order_ok: true,
                commutation_range: Some((lo, hi)),
                counterexample: Some(Counterexample::Commutation { r, i, j }),
            };
        }
    }
    ValidationReport {
        valid: true,
        order_ok: true,
        commutation_range: Some((lo, hi)),
        counterexample: None,
    }
}

/// Scalar Laurent polynomial `sum c t^r` as a one-dimensional exact vector.
pub fn scalar_poly(p: u32, terms: &[(i64, i64)]) -> Result<SeriesVector> {
    let mut acc: BTreeMap<i64, u32> = BTreeMap::new();
    for &(r, c) in terms {
        let e = acc.entry(r).or_insert(0);
        *e = crate::fp::add(p, *e, crate::fp::reduce(p, c));
    }
    SeriesVector::exact(p, 1, acc.into_iter().map(|(r, c)| (r, vec![c])))
}

fn check_scalar(rep: &Rep, f: &SeriesVector) -> Result<()> {
    if f.dim() != 1 {
        return Err(Error::Dimension("scalar argument must have dimension 1".into()));
    }
    if f.modulus() != rep.modulus() {
        return Err(Error::ModulusMismatch(f.modulus(), rep.modulus()));
    }
    Ok(())
}

/// `phi(f) - I` for a Laurent polynomial `f`.
pub fn phi_minus_id(rep: &Rep, f: &SeriesVector) -> Result<BlockMatrix> {
    rep.require_valid()?;
    check_scalar(rep, f)?;
    if !f.is_exact() {
        return Err(Error::Precision("phi_minus_id needs an exact Laurent polynomial".into()));
    }
    phi_minus_id_unchecked(&rep.a0, f)
}

fn phi_minus_id_unchecked(a0: &BlockMatrix, f: &SeriesVector) -> Result<BlockMatrix> {
    let mut acc = BlockMatrix::zero(a0.modulus(), a0.dim());
    if a0.is_zero() {
        return Ok(acc);
    }
    for (r, c) in f.terms() {
        let g = a0.shift_conjugate(r)?.unipotent_power(c[0] as u64)?;
        acc = acc.unipotent_product(&g)?;
    }
    Ok(acc)
}

/// `phi(f) z` for `f` known modulo `t^M`.
///
/// The unknown tail of `f` only moves degrees at or above
/// `iMin(A0) + M + min(0, min(i - j))`, the minimum taken over the blocks of
/// `phi(f_{<M}) - I`.
pub fn phi_apply(rep: &Rep, f: &SeriesVector, z: &SeriesVector) -> Result<SeriesVector> {
    rep.require_valid()?;
    check_scalar(rep, f)?;
    let a = phi_minus_id_unchecked(&rep.a0, &f.to_exact())?;
    let out = a.apply_unipotent(z)?;
    let delta = a.offset_range().map_or(0, |(lo, _)| lo.min(0));
    let tail = match (f.prec(), rep.a0.window()) {
        (Precision::Finite(m), Some(w)) => Precision::Finite(w.i_min + m + delta),
        _ => Precision::Exact,
    };
    let prec = out.prec().min(tail);
    if let Precision::Finite(n) = prec {
        if n <= z.lo() + delta {
            return Err(Error::Precision(format!(
                "no degree of phi(f) z is determined (bound {n}, input starts at {})",
                z.lo()
            )));
        }
    }
    Ok(match prec {
        Precision::Finite(n) => out.truncate(n),
        Precision::Exact => out,
    })
}

/// Over-approximation certificate for the supports of `phi(f) - I`,
/// `f in F_p[[t]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroPattern {
    /// Positions that can be nonzero, with rows below `rows_end`.
    pub envelope: BTreeSet<(i64, i64)>,
    pub rows_end: i64,
    /// `a_m` for `m = 0..=max_m`.
    pub a: Vec<i64>,
    /// `b_i` for `i = 0..rows_end`; empty when the envelope is empty.
    pub b: Vec<i64>,
}

impl ZeroPattern {
    /// True iff the pattern certifies `A(f)_{i,j} = 0` for every `f`.
    pub fn vanishes(&self, i: i64, j: i64) -> bool {
        if self.b.is_empty() {
            return true;
        }
        if i >= 0 && i < self.rows_end && j > i + self.b[i as usize] {
            return true;
        }
        self.a.iter().enumerate().any(|(m, &am)| i < am && j > i - m as i64)
    }
}

/// Products of shifted generators, `A0^{(r_1)} ... A0^{(r_n)}`, normalized
/// to `0 = r_1 <= ... <= r_n`.
#[derive(Clone, Debug)]
pub struct Word {
    pub shifts: Vec<i64>,
    pub product: BlockMatrix,
}

impl Word {
    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    /// The word translated by `s`: shifts `r + s`.
    pub fn translate(&self, s: i64) -> Result<Word> {
        Ok(Word {
            shifts: self.shifts.iter().map(|r| r + s).collect(),
            product: self.product.shift_conjugate(s)?,
        })
    }
}

/// All nonzero normalized words up to a length.
#[derive(Clone, Debug)]
pub struct WordSet {
    /// `by_length[n - 1]` holds the nonzero words of length `n`.
    pub by_length: Vec<Vec<Word>>,
    /// Least `N` with every length-`N` product zero, if reached.
    pub nilpotency: Option<usize>,
    pub explored: usize,
}

impl WordSet {
    pub fn words(&self) -> impl Iterator<Item = &Word> {
        self.by_length.iter().flatten()
    }

    /// Union of the supports of all normalized words.
    pub fn support(&self) -> BTreeSet<(i64, i64)> {
        self.words()
            .flat_map(|w| w.product.blocks().keys().copied())
            .collect()
    }
}

/// Enumerates nonzero words in the commuting shifts of `A0`.
///
/// Since the shifts commute, a product is determined by the multiset of
/// shifts; sorting them, consecutive gaps exceed `jMax - iMin` only if the
/// product vanishes, which bounds the search.
pub fn enumerate_words(a0: &BlockMatrix, max_len: usize, budget: usize) -> Result<WordSet> {
    let mut out = WordSet {
        by_length: Vec::new(),
        nilpotency: None,
        explored: 0,
    };
    let Some(w) = a0.window() else {
        out.nilpotency = Some(1);
        return Ok(out);
    };
    let gap = w.j_max - w.i_min;
    let mut layer = vec![Word {
        shifts: vec![0],
        product: a0.clone(),
    }];
    out.explored = 1;
    for len in 1..=max_len {
        if layer.is_empty() {
            out.nilpotency = Some(len);
            return Ok(out);
        }
        out.by_length.push(layer.clone());
        if len == max_len {
            break;
        }
        let mut next = Vec::new();
        for word in &layer {
            let last = *word.shifts.last().expect("nonempty");
            for g in 0..=gap.max(-1) {
                out.explored += 1;
                if out.explored > budget {
                    return Err(Error::budget(
                        "word enumeration",
                        format!("more than {budget} products at length {}", len + 1),
                    ));
                }
                let r = last + g;
                let prod = word.product.compose(&a0.shift_conjugate(r)?)?;
                if !prod.is_zero() {
                    let mut shifts = word.shifts.clone();
                    shifts.push(r);
                    next.push(Word { shifts, product: prod });
                }
            }
        }
        layer = next;
    }
    if layer.is_empty() {
        out.nilpotency = Some(max_len + 1);
    }
    Ok(out)
}

/// Support envelope of `{phi(f) - I : f in F_p[[t]]}` on rows below
/// `rows_end`, with the monotone sequences extracted from it.
pub fn zero_pattern(rep: &Rep, rows_end: i64, max_m: usize, max_len: usize) -> Result<ZeroPattern> {
    rep.require_valid()?;
    if rows_end.abs() > MAX_DEPTH {
        return Err(Error::DegreeWindow(rows_end));
    }
    let words = enumerate_words(&rep.a0, max_len, 1 << 20)?;
    if words.nilpotency.is_none() {
        return Err(Error::exhausted(
            "zero_pattern",
            format!("products of length {max_len} do not vanish"),
        ));
    }
    let s0 = words.support();
    if s0.is_empty() {
        return Ok(ZeroPattern {
            envelope: BTreeSet::new(),
            rows_end,
            a: vec![0; max_m + 1],
            b: Vec::new(),
        });
    }
    // algebra of r >= 0: translates of normalized words by s >= 0
    let mut envelope = BTreeSet::new();
    for &(i, j) in &s0 {
        let mut s = 0;
        while i + s < rows_end {
            envelope.insert((i + s, j + s));
            s += 1;
        }
    }
    let min_offset = s0.iter().map(|(i, j)| j - i).min().expect("nonempty");
    let mut b = Vec::with_capacity(rows_end.max(0) as usize);
    let mut run = i64::MIN;
    for i in 0..rows_end.max(0) {
        let raw = envelope
            .range((i, i64::MIN)..=(i, i64::MAX))
            .map(|(_, j)| j - i)
            .max()
            .unwrap_or(min_offset);
        run = run.max(raw);
        b.push(run);
    }
    let mut a = Vec::with_capacity(max_m + 1);
    for m in 0..=max_m as i64 {
        let first = s0
            .iter()
            .filter(|(i, j)| j - i > -m)
            .map(|(i, _)| *i)
            .min()
            .unwrap_or(rows_end)
            .min(rows_end);
        let prev = a.last().copied().unwrap_or(0);
        a.push(prev.min(first));
    }
    Ok(ZeroPattern {
        envelope,
        rows_end,
        a,
        b,
    })
}

/// `(I + A)(V)` for `I + A` of order dividing `p`.
fn unipotent_image(a: &BlockMatrix, a_inv: &BlockMatrix, v: &CompactOpenSubgroup) -> Result<CompactOpenSubgroup> {
    if a.is_zero() {
        return Ok(v.clone());
    }
    let k = v.depth();
    let down = |m: &BlockMatrix| m.offset_range().map_or(0, |(lo, _)| (-lo).max(0));
    let (dn, dn_inv) = (down(a), down(a_inv));
    let k2 = k + dn.max(dn_inv);
    if k2 + dn > MAX_DEPTH {
        return Err(Error::DegreeWindow(k2));
    }
    let mut rows = Vec::new();
    for r in v.basis_rows() {
        let img = a.apply_unipotent(&v.lift(r))?;
        rows.push(img.window(-k2, k2)?);
    }
    for deg in k..k2 + dn {
        for c in 0..v.dim_ambient() {
            let img = a.apply_unipotent(&SeriesVector::monomial(v.modulus(), v.dim_ambient(), c, deg, 1))?;
            rows.push(img.window(-k2, k2)?);
        }
    }
    Ok(CompactOpenSubgroup::from_quotient(v.modulus(), v.dim_ambient(), k2, &rows)?.normalize())
}

/// Largest subgroup of `start` invariant under `phi(t^r)` for the shifts
/// returned by `range(depth)`.
fn stabilize(
    rep: &Rep,
    start: CompactOpenSubgroup,
    range: impl Fn(i64) -> (i64, i64),
    max_depth: i64,
    stage: &str,
) -> Result<CompactOpenSubgroup> {
    let a0 = &rep.a0;
    if a0.is_zero() {
        return Ok(start);
    }
    let p = rep.modulus();
    let a0_inv = a0.unipotent_power(p as u64 - 1)?;
    let mut u = start;
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        let mut changed = false;
        let (lo, hi) = range(u.depth());
        for r in lo..hi {
            let g = a0.shift_conjugate(r)?;
            let gi = a0_inv.shift_conjugate(r)?;
            let next = u
                .intersect(&unipotent_image(&g, &gi, &u)?)?
                .intersect(&unipotent_image(&gi, &g, &u)?)?;
            if next != u {
                u = next;
                changed = true;
            }
            if u.depth() > max_depth {
                return Err(Error::exhausted(
                    stage,
                    format!("subgroup needs depth {} > {max_depth}", u.depth()),
                ));
            }
        }
        if !changed {
            return Ok(u);
        }
        if sweeps > 4 * max_depth as usize + 16 {
            return Err(Error::exhausted(stage, format!("no stabilization after {sweeps} sweeps")));
        }
    }
}

fn verify_invariant(rep: &Rep, v: &CompactOpenSubgroup, lo: i64, hi: i64) -> Result<()> {
    let p = rep.modulus();
    let a0_inv = rep.a0.unipotent_power(p as u64 - 1)?;
    for r in lo..hi {
        let g = rep.a0.shift_conjugate(r)?;
        let gi = a0_inv.shift_conjugate(r)?;
        if unipotent_image(&g, &gi, v)? != *v {
            return Err(Error::Inconsistent(format!("subgroup not invariant under phi(t^{r})")));
        }
    }
    Ok(())
}

/// A tidy subgroup `V` with `phi(f)(V) = V` for all `f in F_p[[t]]`.
pub fn invariant_subgroup(rep: &Rep, max_depth: i64) -> Result<CompactOpenSubgroup> {
    rep.require_valid()?;
    let p = rep.modulus();
    let d = rep.dim();
    let Some(w) = rep.a0.window() else {
        return Ok(CompactOpenSubgroup::standard(p, d));
    };
    let range = |k: i64| (0, (k - w.i_min).max(0));
    let v = stabilize(rep, CompactOpenSubgroup::standard(p, d), range, max_depth, "invariant_subgroup")?;
    let v = v.tidy()?;
    let (lo, hi) = range(v.depth());
    verify_invariant(rep, &v, lo, hi)?;
    Ok(v)
}

/// `{eta : phi(f) eta in F_p[[t]]^d for all f}` for a representation that
/// preserves `F_p[[t]]^d` under `phi(F_p[[t]])`.
pub fn u0_subgroup(rep: &Rep, max_depth: i64) -> Result<CompactOpenSubgroup> {
    rep.require_valid()?;
    let p = rep.modulus();
    let d = rep.dim();
    let Some(w) = rep.a0.window() else {
        return Ok(CompactOpenSubgroup::standard(p, d));
    };
    let range = |k: i64| (-w.j_max - k, (k - w.i_min).max(-w.j_max - k));
    let u = stabilize(rep, CompactOpenSubgroup::standard(p, d), range, max_depth, "u0_reduce")?;
    if !u.is_tau_invariant()? {
        return Err(Error::Inconsistent("U_0 is not tau-invariant".into()));
    }
    let (lo, hi) = range(u.depth());
    verify_invariant(rep, &u, lo, hi)?;
    Ok(u)
}

/// A representation made lower triangular.
#[derive(Clone, Debug)]
pub struct ReducedRep {
    pub d_prime: usize,
    pub u0: CompactOpenSubgroup,
    /// `theta(F_p[[t]]^d) = U_0`.
    pub theta: ChangeOfBasis,
    /// `theta^{-1} phi theta`.
    pub inner: Rep,
    /// Depth bound used for the stabilization.
    pub window: i64,
}

pub(crate) fn preserves_lattice(rep: &Rep) -> Result<bool> {
    let v = CompactOpenSubgroup::standard(rep.modulus(), rep.dim());
    let Some(w) = rep.a0.window() else { return Ok(true) };
    let p = rep.modulus();
    let a0_inv = rep.a0.unipotent_power(p as u64 - 1)?;
    for r in 0..(1 - w.i_min).max(0) {
        let g = rep.a0.shift_conjugate(r)?;
        let gi = a0_inv.shift_conjugate(r)?;
        if unipotent_image(&g, &gi, &v)? != v {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Passes to `U_0` and conjugates into lower-triangular form.
pub fn u0_reduce(rep: &Rep, window: i64) -> Result<ReducedRep> {
    rep.require_valid()?;
    if !preserves_lattice(rep)? {
        return Err(Error::NotContained(
            "phi(F_p[[t]]) does not preserve F_p[[t]]^d; normalize with invariant_subgroup first".into(),
        ));
    }
    let u0 = u0_subgroup(rep, window)?;
    if u0.dim() == 0 && u0.depth() >= window {
        return Err(Error::exhausted("u0_reduce", "U_0 trivial within the window"));
    }
    let theta = change_basis(&u0)?;
    let inner = rep.conjugate(&theta)?;
    if !inner.is_lower_triangular() {
        return Err(Error::Inconsistent(format!(
            "conjugated generator not lower triangular: {:?}",
            inner.generator()
        )));
    }
    Ok(ReducedRep {
        d_prime: u0.dim_ambient(),
        u0,
        theta,
        inner,
        window,
    })
}

/// Both reduction steps: conjugation to a lattice-preserving form, then to a
/// lower-triangular form. `matrix` maps reduced coordinates back.
#[derive(Clone, Debug)]
pub struct Normalization {
    pub invariant: CompactOpenSubgroup,
    pub first: ChangeOfBasis,
    pub lattice_preserving: Rep,
    pub reduced: ReducedRep,
    pub matrix: LaurentMatrix,
    pub inverse: LaurentMatrix,
}

pub fn normalize(rep: &Rep, window: i64) -> Result<Normalization> {
    let invariant = invariant_subgroup(rep, window)?;
    let first = change_basis(&invariant)?;
    let lattice_preserving = rep.conjugate(&first)?;
    let reduced = u0_reduce(&lattice_preserving, window)?;
    let matrix = first.matrix.mul(&reduced.theta.matrix)?;
    let inverse = reduced.theta.inverse.mul(&first.inverse)?;
    Ok(Normalization {
        invariant,
        first,
        lattice_preserving,
        reduced,
        matrix,
        inverse,
    })
}

/// The `d x d` identity-free diagonal blocks `A0_{i,i}`.
pub fn diagonal_blocks(rep: &Rep) -> Vec<(i64, MatFp)> {
    rep.a0
        .blocks()
        .iter()
        .filter(|((i, j), _)| i == j)
        .map(|((i, _), m)| (*i, m.clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(p: u32) -> MatFp {
        MatFp::from_rows(p, &[vec![0, 1], vec![0, 0]]).unwrap()
    }

    fn e2() -> Rep {
        Rep::checked(BlockMatrix::single(2, 2, 1, 0, e(2)).unwrap()).unwrap()
    }

    fn above() -> Rep {
        Rep::checked(BlockMatrix::single(2, 2, 0, 1, e(2)).unwrap()).unwrap()
    }

    #[test]
    fn validation_examples() {
        assert!(validate(&Rep::new(BlockMatrix::zero(2, 2))).valid);
        let r = validate(&e2());
        assert!(r.valid);
        assert_eq!(r.commutation_range, Some((-1, 1)));
        let bad = BlockMatrix::single(2, 1, 1, 0, MatFp::identity(2, 1)).unwrap();
        let r = validate(&Rep::new(bad));
        assert!(!r.valid);
        assert_eq!(r.counterexample, Some(Counterexample::Commutation { r: -1, i: 1, j: -1 }));
        let diag = BlockMatrix::single(3, 1, 0, 0, MatFp::identity(3, 1).scale(2)).unwrap();
        let r = validate(&Rep::new(diag));
        assert!(!r.order_ok);
    }

    #[test]
    fn phi_minus_id_examples() {
        let rep = e2();
        assert!(phi_minus_id(&rep, &scalar_poly(2, &[]).unwrap()).unwrap().is_zero());
        assert_eq!(phi_minus_id(&rep, &scalar_poly(2, &[(0, 1)]).unwrap()).unwrap(), *rep.generator());
        let two = phi_minus_id(&rep, &scalar_poly(2, &[(0, 1), (1, 1)]).unwrap()).unwrap();
        assert_eq!(two.blocks().keys().copied().collect::<Vec<_>>(), vec![(1, 0), (2, 1)]);
    }

    #[test]
    fn phi_apply_trivial_and_exact() {
        let rep = Rep::trivial(3, 2);
        let z = SeriesVector::monomial(3, 2, 1, 4, 2).truncate(9);
        let f = scalar_poly(3, &[(0, 1)]).unwrap().truncate(1);
        assert_eq!(phi_apply(&rep, &f, &z).unwrap(), z);
        let rep = e2();
        let f = scalar_poly(2, &[(0, 1), (2, 1)]).unwrap();
        let z = SeriesVector::monomial(2, 2, 1, 0, 1);
        let expect = phi_minus_id(&rep, &f).unwrap().apply_unipotent(&z).unwrap();
        assert_eq!(phi_apply(&rep, &f, &z).unwrap(), expect);
    }

    #[test]
    fn zero_pattern_examples() {
        let zp = zero_pattern(&Rep::trivial(2, 2), 6, 3, 8).unwrap();
        assert!(zp.envelope.is_empty());
        let zp = zero_pattern(&e2(), 6, 3, 8).unwrap();
        assert!(zp.envelope.iter().all(|(i, j)| *i == j + 1 && *j >= 0));
        assert_eq!(zp.b, vec![-1; 6]);
        let zp = zero_pattern(&above(), 6, 3, 8).unwrap();
        assert!(zp.envelope.iter().all(|(i, j)| *j == i + 1 && *i >= 0));
        assert_eq!(zp.b, vec![1; 6]);
        assert!(zp.vanishes(0, 2));
        assert!(!zp.vanishes(0, 1));
    }

    #[test]
    fn invariant_subgroups() {
        assert_eq!(
            invariant_subgroup(&Rep::trivial(2, 2), 32).unwrap(),
            CompactOpenSubgroup::standard(2, 2)
        );
        assert_eq!(invariant_subgroup(&e2(), 32).unwrap(), CompactOpenSubgroup::standard(2, 2));
        // a block at (-1, 0) moves degree 0 down to degree -1
        let y = MatFp::from_rows(3, &[vec![0, 1], vec![0, 0]]).unwrap();
        let rep = Rep::checked(BlockMatrix::single(3, 2, -1, 0, y).unwrap()).unwrap();
        let v = invariant_subgroup(&rep, 32).unwrap();
        assert!(v.is_tau_invariant().unwrap());
        assert_ne!(v, CompactOpenSubgroup::standard(3, 2));
    }

    #[test]
    fn u0_examples() {
        let red = u0_reduce(&e2(), 16).unwrap();
        assert_eq!(red.u0, CompactOpenSubgroup::standard(2, 2));
        assert_eq!(red.theta.matrix, LaurentMatrix::identity(2, 2));
        let red = u0_reduce(&above(), 16).unwrap();
        let expected = CompactOpenSubgroup::module_span(
            2,
            2,
            2,
            &[SeriesVector::monomial(2, 2, 0, 0, 1), SeriesVector::monomial(2, 2, 1, 1, 1)],
        )
        .unwrap();
        assert_eq!(red.u0, expected);
        assert_eq!(red.d_prime, 2);
        assert!(red.inner.is_lower_triangular());
        assert_eq!(red.inner.generator().blocks().keys().copied().collect::<Vec<_>>(), vec![(0, 0)]);
    }

    #[test]
    fn words_of_examples() {
        assert_eq!(enumerate_words(&BlockMatrix::zero(2, 2), 4, 100).unwrap().nilpotency, Some(1));
        assert_eq!(enumerate_words(e2().generator(), 4, 100).unwrap().nilpotency, Some(2));
    }
}
