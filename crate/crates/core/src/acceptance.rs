//! The acceptance checks, shared by the integration test and `selftest`.
//!
//! Every check is exact; randomness comes from fixed seeds.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::Rng;

use crate::endo::{change_basis, BlockMatrix, CompactOpenSubgroup, LazyEndo};
use crate::error::Result;
use crate::group::{central_certificate, nilpotency_class, sd_mul, SDElement};
use crate::instances::{self, random_block_matrix, random_series, random_tidy, rng, suite, Family, Rng64};
use crate::laurent::{basis_expand, Precision, SeriesVector};
use crate::rep::{normalize, phi_apply, phi_minus_id, Rep};
use crate::solver::{oracle_fixed_vector, residuals, solve, SolveOptions};

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: usize,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "criterion {} {} {}: {} ({} ms)",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.title,
            self.detail,
            self.elapsed.as_millis()
        )
    }
}

type Check = fn() -> Result<(bool, String)>;

pub const CRITERIA: [(usize, &str, Check); 9] = [
    (1, "ring homomorphism", ring_homomorphism),
    (2, "index law", index_law),
    (3, "change of basis", change_of_basis),
    (4, "shift law", shift_law),
    (5, "basis expansion", basis_expansion),
    (6, "solver vs oracle", solver_vs_oracle),
    (7, "diagonal products", diagonal_products),
    (8, "nilpotency class", nilpotency),
    (9, "precision soundness", precision_soundness),
];

pub fn run(id: usize) -> Option<Outcome> {
    let &(id, title, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let (pass, detail) = match check() {
        Ok(x) => x,
        Err(e) => (false, format!("error: {e}")),
    };
    Some(Outcome {
        id,
        title,
        pass,
        detail,
        elapsed: start.elapsed(),
    })
}

pub fn run_all() -> Vec<Outcome> {
    CRITERIA.iter().filter_map(|c| run(c.0)).collect()
}

const PRIMES: [u32; 3] = [2, 3, 5];

fn pick<T: Copy>(rng: &mut Rng64, xs: &[T]) -> T {
    xs[rng.gen_range(0..xs.len())]
}

fn ring_homomorphism() -> Result<(bool, String)> {
    let mut rng = rng(0x51);
    let mut failures = 0;
    for _ in 0..200 {
        let p = pick(&mut rng, &PRIMES);
        let d = rng.gen_range(1..=3);
        let (na, nb) = (rng.gen_range(1..=5), rng.gen_range(1..=5));
        let a = random_block_matrix(&mut rng, p, d, 8, na);
        let b = random_block_matrix(&mut rng, p, d, 8, nb);
        let z = random_series(&mut rng, p, d, -8, 9);
        let ab = a.compose(&b)?;
        let lhs = ab.apply(&z)?;
        let rhs = a.apply(&b.apply(&z)?)?;
        let sum = a.add(&b)?.apply(&z)? == a.apply(&z)?.add(&b.apply(&z)?)?;
        let lazy = LazyEndo::from_blocks(&a)
            .compose(&LazyEndo::from_blocks(&b))
            .apply(&z, 24)?;
        let lazy_ok = lazy.prec().covers(23) && lazy.agrees_below(&lhs, 24);
        if lhs != rhs || !sum || !lazy_ok {
            failures += 1;
        }
    }
    Ok((failures == 0, format!("200 random pairs, {failures} mismatches")))
}

/// Counts the cosets of `tau V` in `V` by listing every element of `V`
/// at a common depth and reducing it modulo `tau V`.
fn enumerate_cosets(v: &CompactOpenSubgroup) -> Result<usize> {
    let tv = v.shifted(1)?;
    let depth = v.depth().max(tv.depth());
    let (v, tv) = (v.embed(depth)?, tv.embed(depth)?);
    let p = v.modulus();
    let rows = v.basis_rows();
    let reducers = tv.basis_rows();
    let n = rows.first().map_or(0, Vec::len);
    let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
    let mut digits = vec![0u32; rows.len()];
    loop {
        let mut x = vec![0u32; n];
        for (c, r) in digits.iter().zip(rows) {
            for (xi, ri) in x.iter_mut().zip(r) {
                *xi = crate::fp::add(p, *xi, crate::fp::mul(p, *c, *ri));
            }
        }
        for r in reducers {
            let piv = r.iter().position(|&y| y != 0).expect("echelon row");
            let c = x[piv];
            if c != 0 {
                for (xi, ri) in x.iter_mut().zip(r) {
                    *xi = crate::fp::sub(p, *xi, crate::fp::mul(p, c, *ri));
                }
            }
        }
        seen.insert(x);
        let mut k = 0;
        loop {
            if k == digits.len() {
                return Ok(seen.len());
            }
            digits[k] += 1;
            if digits[k] < p {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}

fn index_law() -> Result<(bool, String)> {
    let mut rng = rng(0x52);
    let mut failures = Vec::new();
    let mut checked = 0;
    for p in [2u32, 3] {
        for d in 1..=3usize {
            let std = CompactOpenSubgroup::standard(p, d);
            let mut vs = vec![std];
            let depth = if (p as f64).powi(4 * d as i32) <= 4096.0 { 2 } else { 1 };
            for _ in 0..4 {
                vs.push(random_tidy(&mut rng, p, d, depth)?);
            }
            for v in &vs {
                checked += 1;
                let expect = (p as u128).pow(d as u32);
                let by_rank = v.index(&v.shifted(1)?)?;
                let by_count = enumerate_cosets(v)? as u128;
                if by_rank != expect || by_count != expect {
                    failures.push(format!("p={p} d={d}: {by_rank}/{by_count}"));
                }
            }
        }
    }
    let random = checked - 6;
    Ok((
        failures.is_empty() && random >= 20,
        format!("standard lattice and {random} random tidy subgroups, coset counts exact; failures {failures:?}"),
    ))
}

fn change_of_basis() -> Result<(bool, String)> {
    let mut rng = rng(0x53);
    let mut failures = 0;
    let target = 32;
    for _ in 0..20 {
        let p = pick(&mut rng, &[2, 3]);
        let d = rng.gen_range(1..=3);
        let depth = rng.gen_range(1..=3);
        let v = random_tidy(&mut rng, p, d, depth)?;
        let cb = change_basis(&v)?;
        for _ in 0..50 {
            let hi = rng.gen_range(1..=8);
            let z = random_series(&mut rng, p, d, 0, hi);
            let exact = cb.matrix.apply(&z)?;
            let lazy = cb.theta.apply(&z, target)?;
            let member = v.contains_vector(&exact.truncate(target))?;
            let back = cb.theta_inv.apply(&exact, target)?;
            let commute_l = cb.theta.apply(&z.shift(1)?, target)?;
            let commute_r = cb.theta.apply(&z, target - 1)?.shift(1)?;
            let ok = member
                && lazy.agrees_below(&exact, target)
                && lazy.prec().covers(target - 1)
                && back.agrees_below(&z, target)
                && back.prec().covers(target - 1)
                && commute_l.agrees_below(&commute_r, target)
                && commute_r.prec().covers(target - 1)
                && cb.inverse.apply(&exact)? == z;
            if !ok {
                failures += 1;
            }
        }
    }
    Ok((failures == 0, format!("20 random tidy subgroups x 50 vectors mod t^{target}, {failures} failures")))
}

fn random_poly(rng: &mut Rng64, p: u32, lo: i64, hi: i64) -> Result<SeriesVector> {
    let terms: Vec<(i64, i64)> = (lo..hi).map(|r| (r, rng.gen_range(0..p) as i64)).collect();
    crate::rep::scalar_poly(p, &terms)
}

fn random_rep(rng: &mut Rng64) -> Rep {
    let p = pick(rng, &PRIMES);
    let d = rng.gen_range(2..=3);
    let family = pick(rng, &[Family::Toeplitz, Family::SingleBlock, Family::Random]);
    instances::generate(family, p, d, rng.gen())
}

fn shift_law() -> Result<(bool, String)> {
    let mut rng = rng(0x54);
    let mut failures = 0;
    for _ in 0..50 {
        let rep = random_rep(&mut rng);
        let f = random_poly(&mut rng, rep.modulus(), -3, 4)?;
        let r = rng.gen_range(-5..=5);
        let lhs = phi_minus_id(&rep, &f.shift(r)?)?;
        let rhs = phi_minus_id(&rep, &f)?.shift_conjugate(r)?;
        let one = phi_minus_id(&rep, &f.shift(1)?)?;
        let blockwise = one
            .blocks()
            .iter()
            .all(|((i, j), m)| phi_minus_id(&rep, &f).map(|a| a.get(i - 1, j - 1) == *m).unwrap_or(false));
        if lhs != rhs || !blockwise {
            failures += 1;
        }
    }
    Ok((failures == 0, format!("50 random (rep, f, r), {failures} mismatches")))
}

fn basis_expansion() -> Result<(bool, String)> {
    let mut rng = rng(0x55);
    let jmax = 16;
    let mut failures = 0;
    for _ in 0..100 {
        let p = pick(&mut rng, &PRIMES);
        let d = rng.gen_range(1..=3);
        let depth = rng.gen_range(1..=2);
        let v = random_tidy(&mut rng, p, d, depth)?;
        let basis = v.complement_basis()?;
        let mut coeffs: BTreeMap<(i64, usize), u32> = BTreeMap::new();
        let mut z = SeriesVector::zero(p, d);
        let mut head = SeriesVector::zero(p, d);
        for j in -2..jmax + 4 {
            for k in 0..d {
                let c = rng.gen_range(0..p);
                if c == 0 {
                    continue;
                }
                let term = basis.basis()[k].shift(j)?.scale(c);
                z = z.add(&term)?;
                if j <= jmax {
                    coeffs.insert((j, k), c);
                    head = head.add(&term)?;
                }
            }
        }
        let ex = basis_expand(&z, &basis, jmax)?;
        let unique = coeffs.iter().all(|(&(j, k), &c)| ex.get(j, k) == c)
            && ex.coeffs.iter().all(|(key, &c)| coeffs.get(key) == Some(&c));
        if !unique || ex.reconstruct(&basis)? != head {
            failures += 1;
        }
    }
    Ok((failures == 0, format!("100 random vectors through level {jmax}, {failures} failures")))
}

fn solver_vs_oracle() -> Result<(bool, String)> {
    let opts = SolveOptions {
        precision: 32,
        ..SolveOptions::default()
    };
    let mut bad = Vec::new();
    let mut slowest = Duration::ZERO;
    let instances = suite();
    for inst in &instances {
        let start = Instant::now();
        let ok = (|| -> Result<bool> {
            let res = solve(&inst.rep, &opts)?;
            let again = residuals(&inst.rep, &res.xi)?;
            let covered = match res.xi.prec() {
                Precision::Exact => true,
                Precision::Finite(n) => n >= 32,
            };
            let oracle = oracle_fixed_vector(&inst.rep, -8, 8)?;
            let oracle_fixed = match &oracle.xi {
                Some(v) => residuals(&inst.rep, v)?.iter().all(|r| r.pass),
                None => false,
            };
            Ok(!res.xi.is_zero() && covered && again.iter().all(|r| r.pass) && oracle_fixed)
        })();
        let took = start.elapsed();
        slowest = slowest.max(took);
        if !matches!(ok, Ok(true)) || took > Duration::from_secs(10) {
            bad.push(format!("{}: {ok:?}", inst.name));
        }
    }
    Ok((
        bad.is_empty() && instances.len() >= 12,
        format!(
            "{} instances, slowest {} ms, failures {bad:?}",
            instances.len(),
            slowest.as_millis()
        ),
    ))
}

/// Ordered products of `d` shifted generators with shifts in `[-w, w]`
/// have zero diagonal blocks at rows in `[-w, w]`.
fn diagonal_vanishes(rep: &Rep, w: i64) -> Result<bool> {
    let d = rep.dim();
    let shifted: Vec<BlockMatrix> = (-w..=w).map(|r| rep.shifted_generator(r)).collect::<Result<_>>()?;
    let n = shifted.len();
    let mut idx = vec![0usize; d];
    loop {
        let mut prod = shifted[idx[0]].clone();
        for &k in &idx[1..] {
            if prod.is_zero() {
                break;
            }
            prod = prod.compose(&shifted[k])?;
        }
        if (-w..=w).any(|i| !prod.get(i, i).is_zero()) {
            return Ok(false);
        }
        let mut pos = 0;
        loop {
            if pos == d {
                return Ok(true);
            }
            idx[pos] += 1;
            if idx[pos] < n {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

fn diagonal_products() -> Result<(bool, String)> {
    let mut checked = 0;
    let mut bad = Vec::new();
    for inst in suite() {
        let mut reps = vec![normalize(&inst.rep, 64)?.reduced.inner];
        if inst.rep.is_lower_triangular() {
            reps.push(inst.rep.clone());
        }
        for rep in reps {
            checked += 1;
            if !diagonal_vanishes(&rep, 8)? {
                bad.push(inst.name.clone());
            }
        }
    }
    Ok((bad.is_empty(), format!("{checked} lower-triangular representations, failures {bad:?}")))
}

fn nilpotency() -> Result<(bool, String)> {
    let mut bad = Vec::new();
    let mut e2_class = None;
    let mut classes = Vec::new();
    for inst in suite() {
        let d = inst.rep.dim();
        let report = nilpotency_class(&inst.rep, 16, d + 2, 64)?;
        if inst.name == "e2" {
            e2_class = report.class;
        }
        classes.push(report.class.unwrap_or(usize::MAX));
        if report.class.is_none_or(|k| k > d + 1) {
            bad.push(format!("{}: {report}", inst.name));
        }
        let xi = solve(&inst.rep, &SolveOptions::default())?.xi;
        if !central_certificate(&inst.rep, &xi)?.central {
            bad.push(format!("{}: solve output not central", inst.name));
        }
    }
    Ok((
        bad.is_empty() && e2_class == Some(2),
        format!("classes {classes:?}, e2 class {e2_class:?}, failures {bad:?}"),
    ))
}

/// Known coefficients of `v`, extended by random coefficients on
/// `[prec, prec + extra)`.
fn complete(rng: &mut Rng64, v: &SeriesVector, extra: i64) -> Result<SeriesVector> {
    let Precision::Finite(n) = v.prec() else {
        return Ok(v.clone());
    };
    let tail = random_series(rng, v.modulus(), v.dim(), n, n + extra);
    v.to_exact().add(&tail)
}

fn truncated(rng: &mut Rng64, p: u32, d: usize, lo: std::ops::Range<i64>, prec: std::ops::Range<i64>) -> SeriesVector {
    let lo = rng.gen_range(lo);
    let prec = rng.gen_range(prec);
    random_series(rng, p, d, lo, prec + 3).truncate(prec)
}

fn sound(claimed: &SeriesVector, full: &SeriesVector) -> bool {
    match claimed.prec() {
        Precision::Finite(n) => claimed.agrees_below(full, n),
        Precision::Exact => claimed == full,
    }
}

fn precision_soundness() -> Result<(bool, String)> {
    let mut rng = rng(0x59);
    let mut counts = [0usize; 3];
    let mut failures = [0usize; 3];
    let mut attempts = 0;
    while counts.iter().any(|&c| c < 200) && attempts < 5000 {
        attempts += 1;
        let rep = random_rep(&mut rng);
        let (p, d) = (rep.modulus(), rep.dim());
        // phi_apply
        if counts[0] < 200 {
            let m = rng.gen_range(1..8);
            let f = truncated(&mut rng, p, 1, -2..1, m..m + 1);
            let z = truncated(&mut rng, p, d, -4..1, 2..10);
            if let Ok(out) = phi_apply(&rep, &f, &z) {
                counts[0] += 1;
                for _ in 0..2 {
                    let full = phi_apply(&rep, &complete(&mut rng, &f, 5)?, &complete(&mut rng, &z, 5)?)?;
                    if !sound(&out, &full) {
                        failures[0] += 1;
                    }
                }
            }
        }
        // block matrix application
        if counts[1] < 200 {
            let n = rng.gen_range(1..=5);
            let a = random_block_matrix(&mut rng, p, d, 6, n);
            let z = truncated(&mut rng, p, d, -6..1, 0..8);
            let out = a.apply(&z)?;
            counts[1] += 1;
            for _ in 0..2 {
                if !sound(&out, &a.apply(&complete(&mut rng, &z, 12)?)?) {
                    failures[1] += 1;
                }
            }
        }
        // semidirect multiplication
        if counts[2] < 200 {
            let mk = |rng: &mut Rng64| -> Result<SDElement> {
                let z = truncated(rng, p, d, -3..1, 2..10);
                let f = truncated(rng, p, 1, -2..1, 1..6);
                SDElement::new(&rep, z, f)
            };
            let (x, y) = (mk(&mut rng)?, mk(&mut rng)?);
            if let Ok(out) = sd_mul(&rep, &x, &y) {
                counts[2] += 1;
                for _ in 0..2 {
                    let xc = SDElement::new(&rep, complete(&mut rng, &x.z, 5)?, complete(&mut rng, &x.f, 5)?)?;
                    let yc = SDElement::new(&rep, complete(&mut rng, &y.z, 5)?, complete(&mut rng, &y.f, 5)?)?;
                    let full = sd_mul(&rep, &xc, &yc)?;
                    if !sound(&out.z, &full.z) || !sound(&out.f, &full.f) {
                        failures[2] += 1;
                    }
                }
            }
        }
    }
    let pass = counts.iter().all(|&c| c >= 200) && failures.iter().all(|&f| f == 0);
    Ok((
        pass,
        format!(
            "trials phi_apply/apply/sd_mul = {counts:?}, failures {failures:?}"
        ),
    ))
}
