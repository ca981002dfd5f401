//! Nonzero vectors fixed by every `phi(f)`.
//!
//! The pipeline conjugates the representation until `phi(F_p[[t]])` is lower
//! triangular, then builds a fixed vector from a nonzero product of maximal
//! length in the algebra spanned by the shifted generators. Every answer is
//! re-checked against the original generator.

use std::collections::BTreeMap;

use crate::endo::BlockMatrix;
use crate::error::{Error, Result};
use crate::fp::{self, MatFp};
use crate::laurent::{Precision, SeriesVector};
use crate::rep::{self, enumerate_words, normalize, phi_minus_id, scalar_poly, Rep, Word, WordSet};

/// Result of the brute-force search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub window: (i64, i64),
    /// Dimension of the space of fixed Laurent polynomials supported in
    /// the window.
    pub kernel_dim: usize,
    pub xi: Option<SeriesVector>,
}

/// Searches for a fixed Laurent polynomial supported in `[l, r)` by solving
/// `A0^{(s)} xi = 0` for every shift that can act on the window.
pub fn oracle_fixed_vector(rep: &Rep, l: i64, r: i64) -> Result<OracleResult> {
    rep.require_valid()?;
    if r <= l {
        return Err(Error::Dimension(format!("empty search window [{l}, {r})")));
    }
    let p = rep.modulus();
    let d = rep.dim();
    let width = (r - l) as usize;
    if width > 1 << 12 {
        return Err(Error::DegreeWindow(r - l));
    }
    let n = width * d;
    let a0 = rep.generator();
    let mut rows: Vec<Vec<u32>> = Vec::new();
    if let Some(w) = a0.window() {
        for s in (l - w.j_max)..(r - w.j_min) {
            // rows of A0^{(s)} xi, keyed by output degree
            let mut out: BTreeMap<i64, Vec<Vec<u32>>> = BTreeMap::new();
            for ((i, j), m) in a0.blocks() {
                let col = j + s;
                if col < l || col >= r {
                    continue;
                }
                let e = out.entry(i + s).or_insert_with(|| vec![vec![0; n]; d]);
                let base = (col - l) as usize * d;
                for (row, er) in e.iter_mut().enumerate() {
                    for k in 0..d {
                        er[base + k] = fp::add(p, er[base + k], m.get(row, k));
                    }
                }
            }
            rows.extend(out.into_values().flatten().filter(|v| v.iter().any(|&x| x != 0)));
        }
    }
    let kernel = if rows.is_empty() {
        (0..n)
            .map(|i| {
                let mut v = vec![0; n];
                v[i] = 1;
                v
            })
            .collect()
    } else {
        MatFp::from_row_vectors(p, n, &rows).kernel_basis()
    };
    let kernel_dim = kernel.len();
    let xi = if kernel.is_empty() {
        None
    } else {
        // earliest (degree, coordinate) pivot first
        let (reduced, _) = MatFp::from_row_vectors(p, n, &kernel).rref();
        Some(SeriesVector::from_window(p, d, l, &reduced.row(0)))
    };
    Ok(OracleResult {
        window: (l, r),
        kernel_dim,
        xi,
    })
}

/// The linear functional `eta -> ((A tau^shift eta)_degree)[coord]`.
#[derive(Clone, Debug)]
pub struct Functional {
    pub matrix: BlockMatrix,
    pub shift: i64,
    pub degree: i64,
    pub coord: usize,
}

impl Functional {
    /// `None` when the value depends on unknown coefficients of `eta`.
    pub fn eval(&self, eta: &SeriesVector) -> Result<Option<u32>> {
        let out = self.matrix.apply(&eta.shift(self.shift)?)?;
        if !out.prec().covers(self.degree) {
            return Ok(None);
        }
        Ok(Some(out.project(self.degree)?[self.coord]))
    }
}

/// Increasing family `E_n`: `E_n` is the union of the levels up to `n`.
#[derive(Clone, Debug, Default)]
pub struct ConstraintFamily {
    levels: BTreeMap<i64, Vec<Functional>>,
}

impl ConstraintFamily {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_level(&mut self, n: i64, fs: Vec<Functional>) {
        self.levels.entry(n).or_default().extend(fs);
    }

    pub fn upto(&self, n: i64) -> impl Iterator<Item = &Functional> {
        self.levels.range(..=n).flat_map(|(_, v)| v.iter())
    }

    pub fn all(&self) -> impl Iterator<Item = &Functional> {
        self.levels.values().flatten()
    }

    pub fn len(&self) -> usize {
        self.levels.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn annihilates<'a>(fs: impl Iterator<Item = &'a Functional>, eta: &SeriesVector) -> Result<bool> {
    for f in fs {
        if let Some(v) = f.eval(eta)? {
            if v != 0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Extracts a vector known modulo `t^N` from candidates `eta^{(n)}`
/// annihilating `E_n`.
///
/// Degree by degree, among the surviving candidates the least coefficient
/// occurring in the later half is kept; it must occur at least twice.
pub fn refine_limit(
    family: &ConstraintFamily,
    candidates: &BTreeMap<i64, SeriesVector>,
    n_target: i64,
) -> Result<SeriesVector> {
    if candidates.len() < 2 {
        return Err(Error::exhausted("refine_limit", "at least two candidates are needed"));
    }
    if n_target < 1 {
        return Err(Error::Precision(format!("target precision {n_target} < 1")));
    }
    let (p, d) = {
        let first = candidates.values().next().expect("nonempty");
        (first.modulus(), first.dim())
    };
    for (n, eta) in candidates {
        if !eta.prec().covers(n_target - 1) {
            return Err(Error::Precision(format!("candidate {n} is not known below t^{n_target}")));
        }
        if eta.project(0)?.iter().all(|&x| x == 0) {
            return Err(Error::Certificate(format!("candidate {n} has zero degree-0 coefficient")));
        }
        if !annihilates(family.upto(*n), eta)? {
            return Err(Error::Certificate(format!("candidate {n} violates its constraints")));
        }
    }
    let mut survivors: Vec<&SeriesVector> = candidates.values().collect();
    let mut prefix: Vec<(i64, Vec<u32>)> = Vec::new();
    for deg in 0..n_target {
        let coeff = |eta: &SeriesVector| eta.project(deg).expect("covered");
        let tail = &survivors[survivors.len() / 2..];
        let chosen = tail.iter().map(|e| coeff(e)).min().expect("nonempty tail");
        survivors.retain(|e| coeff(e) == chosen);
        if survivors.len() < 2 {
            return Err(Error::exhausted(
                "refine_limit",
                format!("prefix of length {} does not recur; supply more candidates", deg + 1),
            ));
        }
        prefix.push((deg, chosen));
    }
    let eta = SeriesVector::new(p, d, 0, Precision::Finite(n_target), prefix.into_iter().collect::<BTreeMap<_, _>>())?;
    if !annihilates(family.all(), &eta)? {
        return Err(Error::Certificate("limit violates a determined constraint".into()));
    }
    Ok(eta)
}

/// Output of [`eta_above`].
#[derive(Clone, Debug)]
pub struct EtaAbove {
    pub eta: SeriesVector,
    pub c: i64,
    pub i_star: i64,
    pub j_star: i64,
    pub a: i64,
    pub b: i64,
    /// Shifts of the word playing the role of `A(f*)`.
    pub witness: Vec<i64>,
    pub z: usize,
    /// The constraints `(A(g) eta)_m = 0`, `m < 0`, `g in t^{-c} F_p[[t]]`.
    pub functionals: Vec<Functional>,
}

fn word_set(rep: &Rep, max_len: usize, budget: usize, stage: &str) -> Result<WordSet> {
    let words = enumerate_words(rep.generator(), max_len, budget)?;
    if words.nilpotency.is_none() {
        return Err(Error::exhausted(stage, format!("nonzero products of length {max_len}")));
    }
    Ok(words)
}

/// Constraints `((W^{(s)} eta)_m)[k] = 0` for `m < 0`, `s >= -c`.
fn above_functionals(words: &WordSet, d: usize, c: i64) -> Result<Vec<Functional>> {
    let mut out = Vec::new();
    for w in words.words() {
        let i_min = w.product.window().expect("nonzero word").i_min;
        for s in -c..-i_min {
            let m = w.product.shift_conjugate(s)?;
            for deg in (i_min + s)..0 {
                for coord in 0..d {
                    out.push(Functional {
                        matrix: m.clone(),
                        shift: 0,
                        degree: deg,
                        coord,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// A nonzero `eta in F_p[[t]]^d` with `eta_0 != 0` and
/// `phi(g) eta in F_p[[t]]^d` for all `g in t^{-c} F_p[[t]]`, for a
/// representation preserving `F_p[[t]]^d`. `None` when `phi(F_p[[t]])` is
/// already lower triangular.
pub fn eta_above(rep: &Rep, c: i64, max_len: usize, budget: usize) -> Result<Option<EtaAbove>> {
    rep.require_valid()?;
    if c < 1 {
        return Err(Error::Dimension(format!("c = {c} must be positive")));
    }
    if !rep::preserves_lattice(rep)? {
        return Err(Error::NotContained("phi(F_p[[t]]) does not preserve F_p[[t]]^d".into()));
    }
    let words = word_set(rep, max_len, budget, "eta_above")?;
    let support = words.support();
    let Some(i_star) = support.iter().filter(|(i, j)| j > i).map(|(i, _)| *i).min() else {
        return Ok(None);
    };
    let j_star = support
        .iter()
        .filter(|(i, j)| *i == i_star && *j > i_star)
        .map(|(_, j)| *j)
        .max()
        .expect("row i* is nonempty");
    let a = support
        .iter()
        .filter(|(i, j)| j - i >= -c)
        .map(|(i, _)| *i)
        .min()
        .expect("i* qualifies");
    let b = support
        .iter()
        .filter(|(i, j)| *i == a && j - i >= -c)
        .map(|(_, j)| *j)
        .max()
        .expect("row a is nonempty");
    let witness: &Word = words
        .words()
        .find(|w| !w.product.get(a, b).is_zero())
        .expect("support comes from words");
    let blk = witness.product.get(a, b);
    let z = (0..rep.dim())
        .find(|&k| blk.column(k).iter().any(|&x| x != 0))
        .expect("nonzero block");
    let p = rep.modulus();
    let zbar = SeriesVector::monomial(p, rep.dim(), z, b, 1);
    let eta = witness.product.apply(&zbar)?.shift(-a)?;
    let functionals = above_functionals(&words, rep.dim(), c)?;
    if eta.min_degree().is_none_or(|m| m < 0) || eta.project(0)?.iter().all(|&x| x == 0) {
        return Err(Error::Inconsistent("eta_above lost its normalization".into()));
    }
    if !annihilates(functionals.iter(), &eta)? {
        return Err(Error::Inconsistent(format!("eta_above fails its vanishing checks for c = {c}")));
    }
    Ok(Some(EtaAbove {
        eta,
        c,
        i_star,
        j_star,
        a,
        b,
        witness: witness.shifts.clone(),
        z,
        functionals,
    }))
}

/// Report of [`diagonal_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalReport {
    pub unipotent: bool,
    pub family_size: usize,
    pub triangularized: bool,
    /// Products of `d` diagonal blocks were enumerated exhaustively.
    pub exhaustive: bool,
    pub products_vanish: bool,
    pub failure: Option<String>,
}

impl DiagonalReport {
    pub fn pass(&self) -> bool {
        self.unipotent && self.triangularized && self.products_vanish
    }
}

/// Checks that the diagonal blocks `A0_{s,s}` of a lower-triangular
/// representation form a commuting nilpotent family whose `d`-fold products
/// vanish.
pub fn diagonal_check(rep: &Rep) -> Result<DiagonalReport> {
    if !rep.is_lower_triangular() {
        return Err(Error::Branch("diagonal_check needs a lower-triangular representation".into()));
    }
    let d = rep.dim();
    let p = rep.modulus();
    let family: Vec<MatFp> = rep::diagonal_blocks(rep).into_iter().map(|(_, m)| m).collect();
    let mut report = DiagonalReport {
        unipotent: true,
        family_size: family.len(),
        triangularized: true,
        exhaustive: true,
        products_vanish: true,
        failure: None,
    };
    for (k, m) in family.iter().enumerate() {
        if !fp::is_unipotent(&m.add(&MatFp::identity(p, d))?, d) {
            report.unipotent = false;
            report.failure = Some(format!("diagonal block {k} is not unipotent"));
            report.triangularized = false;
            report.products_vanish = false;
            return Ok(report);
        }
    }
    if family.is_empty() {
        return Ok(report);
    }
    if let Err(e) = fp::joint_strict_triangularize(&family) {
        report.triangularized = false;
        report.failure = Some(e.to_string());
    }
    let total = (family.len() as f64).powi(d as i32);
    if d <= 3 && total <= 1e5 {
        let mut idx = vec![0usize; d];
        'outer: loop {
            let mut prod = MatFp::identity(p, d);
            for &k in &idx {
                prod = prod.mat_mul(&family[k])?;
            }
            if !prod.is_zero() {
                report.products_vanish = false;
                report.failure = Some(format!("product {idx:?} of diagonal blocks is nonzero"));
                break;
            }
            for pos in (0..d).rev() {
                idx[pos] += 1;
                if idx[pos] < family.len() {
                    continue 'outer;
                }
                idx[pos] = 0;
            }
            break;
        }
    } else {
        report.exhaustive = false;
        report.products_vanish = report.triangularized;
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NilpotencyStatus {
    /// Least `N` with every product of `N` shifted generators zero.
    Nilpotent(usize),
    /// Nonzero products of the maximal explored length remain.
    NotNilpotentWithin(usize),
    Inconclusive(String),
}

#[derive(Clone, Debug)]
pub struct NilpotencyReport {
    pub status: NilpotencyStatus,
    pub explored: usize,
    pub words: Option<WordSet>,
}

/// Nilpotency of the algebra spanned by all products of shifted generators.
pub fn algebra_nilpotency(rep: &Rep, max_len: usize, budget: usize) -> Result<NilpotencyReport> {
    rep.require_valid()?;
    if !rep.is_lower_triangular() {
        return Err(Error::Branch("algebra_nilpotency needs a lower-triangular representation".into()));
    }
    match enumerate_words(rep.generator(), max_len, budget) {
        Ok(words) => Ok(NilpotencyReport {
            status: match words.nilpotency {
                Some(n) => NilpotencyStatus::Nilpotent(n),
                None => NilpotencyStatus::NotNilpotentWithin(max_len),
            },
            explored: words.explored,
            words: Some(words),
        }),
        Err(Error::Budget { detail, .. }) => Ok(NilpotencyReport {
            status: NilpotencyStatus::Inconclusive(detail),
            explored: budget,
            words: None,
        }),
        Err(e) => Err(e),
    }
}

/// `xi = B eta` for a nonzero product `B` of `N - 1` shifted generators;
/// every further product kills it.
pub fn fixed_vector_nilpotent(rep: &Rep, words: &WordSet) -> Result<SeriesVector> {
    let p = rep.modulus();
    let d = rep.dim();
    let n = words
        .nilpotency
        .ok_or_else(|| Error::Branch("algebra not nilpotent within the explored lengths".into()))?;
    if n == 1 {
        return Ok(SeriesVector::monomial(p, d, 0, 0, 1));
    }
    let b = words.by_length[n - 2]
        .first()
        .ok_or_else(|| Error::Inconsistent(format!("no nonzero product of length {}", n - 1)))?;
    for ((_, j), m) in b.product.blocks() {
        for k in 0..d {
            if m.column(k).iter().any(|&x| x != 0) {
                let xi = b.product.apply(&SeriesVector::monomial(p, d, k, *j, 1))?;
                if xi.is_zero() {
                    continue;
                }
                return Ok(xi);
            }
        }
    }
    Err(Error::Inconsistent("nonzero product annihilates every monomial".into()))
}

/// Output of one round of [`fixed_vector_general`].
#[derive(Clone, Debug)]
pub struct GeneralStep {
    pub eta: SeriesVector,
    pub r: i64,
    pub a_r: i64,
    /// `None` when `e_1 t^0` already satisfies the constraints.
    pub q: Option<i64>,
    pub length: usize,
    pub functionals: Vec<Functional>,
}

/// Constraints `((A tau^j eta)_i)[k] = 0` for `-r < i < r`, `j > i - r`,
/// with `A` running over the explored products.
fn general_functionals(words: &WordSet, d: usize, r: i64, lo: i64) -> Result<Vec<Functional>> {
    let mut out = Vec::new();
    for w in words.words() {
        let win = w.product.window().expect("nonzero word");
        for s in (-r - win.i_max + 1)..(r - win.i_min) {
            let m = w.product.shift_conjugate(s)?;
            for i in (-r + 1)..r {
                if !m.blocks().keys().any(|(row, _)| *row == i) {
                    continue;
                }
                for j in (i - r + 1)..=(i - lo) {
                    for coord in 0..d {
                        out.push(Functional {
                            matrix: m.clone(),
                            shift: j,
                            degree: i,
                            coord,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// The construction for an algebra with nonzero products of every length:
/// `eta = B(z t^{-q})` for a long product `B` whose entries all lie `q` or
/// more steps below the diagonal.
pub fn fixed_vector_general(rep: &Rep, r: i64, words: &WordSet) -> Result<GeneralStep> {
    rep.require_valid()?;
    if r < 1 {
        return Err(Error::Dimension(format!("r = {r} must be positive")));
    }
    if !rep.is_lower_triangular() {
        return Err(Error::Branch("fixed_vector_general needs a lower-triangular representation".into()));
    }
    let p = rep.modulus();
    let d = rep.dim();
    let a_r = rep.generator().window().map_or(0, |w| (-w.i_min).max(0));
    let trivial = SeriesVector::monomial(p, d, 0, 0, 1);
    let fs = general_functionals(words, d, r, 0)?;
    if annihilates(fs.iter(), &trivial)? {
        return Ok(GeneralStep {
            eta: trivial,
            r,
            a_r,
            q: None,
            length: 0,
            functionals: fs,
        });
    }
    if let Some(n) = words.nilpotency {
        return Err(Error::Branch(format!(
            "products of length {n} vanish; use the nilpotent construction"
        )));
    }
    let need = ((r + a_r) as usize) * d;
    let mut deepest = 0;
    for w in words.words().filter(|w| w.len() >= need) {
        let (q, _) = w.product.offset_range().expect("nonzero word");
        deepest = deepest.max(q);
        if q < r + a_r {
            continue;
        }
        let (&(i, j), _) = w
            .product
            .blocks()
            .iter()
            .find(|((i, j), _)| i - j == q)
            .expect("offset attained");
        let b = w.product.shift_conjugate(-i)?;
        let blk = b.get(0, j - i);
        let Some(z) = (0..d).find(|&k| blk.column(k).iter().any(|&x| x != 0)) else {
            continue;
        };
        let eta = b.apply(&SeriesVector::monomial(p, d, z, -q, 1))?;
        let lo = eta.min_degree().unwrap_or(0).min(0);
        let fs = general_functionals(words, d, r, lo)?;
        if eta.project(0)?.iter().all(|&x| x == 0) || !annihilates(fs.iter(), &eta)? {
            continue;
        }
        return Ok(GeneralStep {
            eta,
            r,
            a_r,
            q: Some(q),
            length: w.len(),
            functionals: fs,
        });
    }
    Err(Error::exhausted(
        "fixed_vector_general",
        format!("no product of length >= {need} vanishes on the first {} subdiagonals (deepest {deepest})", r + a_r - 1),
    ))
}

/// Budgets and windows for [`solve`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    /// Target precision for results that are not exact.
    pub precision: i64,
    /// Depth bound for the subgroup computations.
    pub depth: i64,
    pub max_len: usize,
    pub budget: usize,
    pub oracle_window: (i64, i64),
    pub above_c: i64,
    pub general_rounds: i64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            precision: 8,
            depth: 64,
            max_len: 48,
            budget: 200_000,
            oracle_window: (-8, 8),
            above_c: 4,
            general_rounds: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Residual {
    pub r: i64,
    /// Degrees below this bound were checked; `Exact` means all of them.
    pub checked_below: Precision,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub phases: Vec<String>,
    pub invariant_depth: i64,
    pub u0_depth: i64,
    pub d_prime: usize,
    pub i_star: Option<i64>,
    pub j_star: Option<i64>,
    pub a: Option<i64>,
    pub b: Option<i64>,
    pub q: Option<i64>,
    pub nilpotency: Option<usize>,
    pub branch: String,
    pub words_explored: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleCheck {
    pub window: (i64, i64),
    pub oracle_xi: Option<SeriesVector>,
    pub oracle_is_fixed: bool,
    /// Both vectors are fixed (the oracle may find nothing in its window).
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedVectorResult {
    pub xi: SeriesVector,
    pub exact: bool,
    pub residuals: Vec<Residual>,
    pub trace: Trace,
    pub oracle: OracleCheck,
}

/// Recomputes `(phi(t^r) - I) xi` for every shift that can act on `xi`.
pub fn residuals(rep: &Rep, xi: &SeriesVector) -> Result<Vec<Residual>> {
    let p = rep.modulus();
    let mut rs: Vec<i64> = (-4..=4).collect();
    if let (Some(w), Some(lo), Some(hi)) = (rep.generator().window(), xi.min_degree(), xi.max_degree()) {
        let hi = match xi.prec() {
            Precision::Finite(n) => n - 1,
            Precision::Exact => hi,
        };
        let top = match xi.prec() {
            Precision::Finite(n) => n - 1 - w.i_min,
            Precision::Exact => hi - w.j_min,
        };
        rs.extend((lo - w.j_max)..=top.max(lo - w.j_max));
    }
    rs.sort_unstable();
    rs.dedup();
    let mut out = Vec::with_capacity(rs.len());
    for r in rs {
        let a = phi_minus_id(rep, &scalar_poly(p, &[(r, 1)])?)?;
        let img = a.apply(xi)?;
        out.push(Residual {
            r,
            checked_below: img.prec(),
            pass: img.is_zero(),
        });
    }
    Ok(out)
}

fn is_fixed(rep: &Rep, xi: &SeriesVector) -> Result<bool> {
    Ok(residuals(rep, xi)?.iter().all(|r| r.pass))
}

/// Finds a nonzero vector fixed by every `phi(f)`.
pub fn solve(rep: &Rep, opts: &SolveOptions) -> Result<FixedVectorResult> {
    rep.require_valid()?;
    let mut trace = Trace::default();
    let norm = normalize(rep, opts.depth)?;
    trace.phases.push("invariant_subgroup".into());
    trace.phases.push("u0_reduce".into());
    trace.invariant_depth = norm.invariant.depth();
    trace.u0_depth = norm.reduced.u0.depth();
    trace.d_prime = norm.reduced.d_prime;

    if !norm.lattice_preserving.is_lower_triangular() {
        if let Some(ea) = eta_above(&norm.lattice_preserving, opts.above_c, opts.max_len, opts.budget)? {
            trace.phases.push("eta_above".into());
            trace.i_star = Some(ea.i_star);
            trace.j_star = Some(ea.j_star);
            trace.a = Some(ea.a);
            trace.b = Some(ea.b);
        }
    }

    let inner = &norm.reduced.inner;
    let diag = diagonal_check(inner)?;
    trace.phases.push("diagonal_check".into());
    if !diag.pass() {
        return Err(Error::Inconsistent(format!(
            "diagonal check failed: {}",
            diag.failure.unwrap_or_default()
        )));
    }
    let nil = algebra_nilpotency(inner, opts.max_len, opts.budget)?;
    trace.phases.push("algebra_nilpotency".into());
    trace.words_explored = nil.explored;

    let (xi_inner, exact) = match (&nil.status, &nil.words) {
        (NilpotencyStatus::Nilpotent(n), Some(words)) => {
            trace.nilpotency = Some(*n);
            trace.branch = "nilpotent".into();
            trace.phases.push("fixed_vector_nilpotent".into());
            (fixed_vector_nilpotent(inner, words)?, true)
        }
        (_, words) => {
            trace.branch = "general".into();
            trace.phases.push("fixed_vector_general".into());
            let words = match words {
                Some(w) => w.clone(),
                None => enumerate_words(inner.generator(), opts.max_len.min(8), opts.budget)?,
            };
            let mut family = ConstraintFamily::new();
            let mut candidates = BTreeMap::new();
            for r in 1..=opts.general_rounds {
                match fixed_vector_general(inner, r, &words) {
                    Ok(step) => {
                        trace.q = step.q.or(trace.q);
                        family.push_level(r, step.functionals);
                        candidates.insert(r, step.eta);
                    }
                    Err(e) if candidates.is_empty() => return Err(e),
                    Err(_) => break,
                }
            }
            trace.phases.push("refine_limit".into());
            let eta = refine_limit(&family, &candidates, opts.precision)?;
            (eta, false)
        }
    };

    let xi = norm.matrix.apply(&xi_inner)?;
    if xi.is_zero() {
        return Err(Error::Inconsistent("fixed vector mapped to zero".into()));
    }
    let res = residuals(rep, &xi)?;
    trace.phases.push("residuals".into());
    if let Some(bad) = res.iter().find(|r| !r.pass) {
        return Err(Error::Inconsistent(format!("residual for r = {} does not vanish", bad.r)));
    }

    let (l, r) = opts.oracle_window;
    let found = oracle_fixed_vector(rep, l, r)?;
    trace.phases.push("oracle".into());
    let oracle_is_fixed = match &found.xi {
        Some(v) => is_fixed(rep, v)?,
        None => true,
    };
    Ok(FixedVectorResult {
        xi,
        exact,
        residuals: res,
        trace,
        oracle: OracleCheck {
            window: found.window,
            oracle_xi: found.xi,
            oracle_is_fixed,
            agree: oracle_is_fixed,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(p: u32) -> MatFp {
        MatFp::from_rows(p, &[vec![0, 1], vec![0, 0]]).unwrap()
    }

    fn single(i: i64, j: i64) -> Rep {
        Rep::checked(BlockMatrix::single(2, 2, i, j, e(2)).unwrap()).unwrap()
    }

    #[test]
    fn oracle_examples() {
        let o = oracle_fixed_vector(&Rep::trivial(2, 2), -3, 1).unwrap();
        assert_eq!(o.xi, Some(SeriesVector::monomial(2, 2, 0, -3, 1)));
        assert_eq!(o.kernel_dim, 8);
        let o = oracle_fixed_vector(&single(1, 0), 0, 4).unwrap();
        assert_eq!(o.xi, Some(SeriesVector::monomial(2, 2, 0, 0, 1)));
        assert_eq!(o.kernel_dim, 4);
        let o = oracle_fixed_vector(&single(0, 1), 0, 4).unwrap();
        assert_eq!(o.xi, Some(SeriesVector::monomial(2, 2, 0, 0, 1)));
    }

    #[test]
    fn nilpotent_examples() {
        let words = enumerate_words(single(1, 0).generator(), 8, 1000).unwrap();
        let xi = fixed_vector_nilpotent(&single(1, 0), &words).unwrap();
        assert_eq!(xi, SeriesVector::monomial(2, 2, 0, 1, 1));
        let words = enumerate_words(&BlockMatrix::zero(2, 2), 8, 1000).unwrap();
        assert_eq!(
            fixed_vector_nilpotent(&Rep::trivial(2, 2), &words).unwrap(),
            SeriesVector::monomial(2, 2, 0, 0, 1)
        );
    }

    #[test]
    fn eta_above_example() {
        let ea = eta_above(&single(0, 1), 2, 8, 1000).unwrap().unwrap();
        assert_eq!((ea.i_star, ea.j_star, ea.a, ea.b, ea.z), (0, 1, 0, 1, 1));
        assert_eq!(ea.eta, SeriesVector::monomial(2, 2, 0, 0, 1));
        assert!(eta_above(&single(1, 0), 2, 8, 1000).unwrap().is_none());
    }

    #[test]
    fn refine_examples() {
        let fam = ConstraintFamily::new();
        let v = SeriesVector::exact(3, 1, [(0, vec![1]), (2, vec![2]), (5, vec![1])]).unwrap();
        let cands: BTreeMap<i64, SeriesVector> = (1..4).map(|n| (n, v.clone())).collect();
        assert_eq!(refine_limit(&fam, &cands, 4).unwrap(), v.truncate(4));
        let cands: BTreeMap<i64, SeriesVector> = (1..5)
            .map(|n| (n, v.add(&SeriesVector::monomial(3, 1, 0, 3 + n, 1)).unwrap()))
            .collect();
        assert_eq!(refine_limit(&fam, &cands, 3).unwrap(), v.truncate(3));
        assert!(refine_limit(&fam, &cands.clone().into_iter().take(1).collect(), 3).is_err());
    }

    #[test]
    fn diagonal_examples() {
        let rep = single(0, 0);
        let r = diagonal_check(&rep).unwrap();
        assert!(r.pass());
        assert!(diagonal_check(&single(1, 0)).unwrap().pass());
    }

    #[test]
    fn solve_examples() {
        let opts = SolveOptions::default();
        let out = solve(&Rep::trivial(2, 2), &opts).unwrap();
        assert_eq!(out.xi, SeriesVector::monomial(2, 2, 0, 0, 1));
        assert!(out.exact);
        for rep in [single(1, 0), single(0, 1)] {
            let out = solve(&rep, &opts).unwrap();
            assert!(out.residuals.iter().all(|r| r.pass));
            assert!(out.oracle.agree);
            assert!((-4..=4).all(|r| out.residuals.iter().any(|x| x.r == r)));
        }
        let out = solve(&single(0, 1), &opts).unwrap();
        assert_eq!(out.xi, SeriesVector::monomial(2, 2, 0, 0, 1));
    }
}
