//! Instance families, the shipped suite, and seeded random objects.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::endo::{BlockMatrix, CompactOpenSubgroup};
use crate::error::Result;
use crate::fp::MatFp;
use crate::laurent::SeriesVector;
use crate::rep::{validate, Rep};

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Toeplitz,
    SingleBlock,
    Random,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Toeplitz => "toeplitz",
            Family::SingleBlock => "single-block",
            Family::Random => "random",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "toeplitz" => Some(Family::Toeplitz),
            "single-block" => Some(Family::SingleBlock),
            "random" => Some(Family::Random),
            _ => None,
        }
    }
}

/// A named generator with provenance.
#[derive(Clone, Debug)]
pub struct Instance {
    pub name: String,
    pub family: String,
    pub seed: Option<u64>,
    pub rep: Rep,
}

pub fn random_matrix(rng: &mut Rng64, p: u32, rows: usize, cols: usize) -> MatFp {
    let mut m = MatFp::zeros(p, rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set(i, j, rng.gen_range(0..p));
        }
    }
    m
}

pub fn random_invertible(rng: &mut Rng64, p: u32, d: usize) -> MatFp {
    loop {
        let m = random_matrix(rng, p, d, d);
        if m.rank() == d {
            return m;
        }
    }
}

fn nonzero(rng: &mut Rng64, p: u32) -> u32 {
    rng.gen_range(1..p)
}

/// `S J S^{-1}` for the nilpotent Jordan block `J` of size `k <= d`.
fn conjugated_jordan(rng: &mut Rng64, p: u32, d: usize, k: usize) -> MatFp {
    let mut j = MatFp::zeros(p, d, d);
    for i in 0..k.saturating_sub(1) {
        j.set(i, i + 1, 1);
    }
    let s = random_invertible(rng, p, d);
    let si = s.inverse().expect("invertible");
    s.mat_mul(&j).and_then(|x| x.mat_mul(&si)).expect("square")
}

/// `A0 = c N` at `(0, 0)` plus multiples of `N^{k-1}` in column 0, where
/// `N` is nilpotent of index `k = min(d, p)`. All products of the shifts
/// are polynomials in `N`, and `N^{k-1}` times any of them vanishes.
pub fn toeplitz(p: u32, d: usize, seed: u64) -> Rep {
    let mut rng = rng(seed);
    let k = d.min(p as usize);
    if k < 2 {
        return Rep::trivial(p, d);
    }
    let n = conjugated_jordan(&mut rng, p, d, k);
    let top = n.pow(k as u32 - 1).expect("square");
    let c = nonzero(&mut rng, p);
    let mut blocks = vec![((0, 0), n.scale(c))];
    for m in [-2i64, -1, 1, 2] {
        if rng.gen_bool(0.4) {
            blocks.push(((m, 0), top.scale(nonzero(&mut rng, p))));
        }
    }
    Rep::checked(BlockMatrix::from_blocks(p, d, blocks).expect("blocks")).expect("constructed valid")
}

/// One square-zero block `u v^T` with `v^T u = 0` at a random position.
pub fn single_block(p: u32, d: usize, seed: u64) -> Rep {
    let mut rng = rng(seed);
    if d < 2 {
        return Rep::trivial(p, d);
    }
    let y = square_zero(&mut rng, p, d);
    let i = rng.gen_range(-2..=2);
    let j = rng.gen_range(-2..=2);
    Rep::checked(BlockMatrix::single(p, d, i, j, y).expect("block")).expect("constructed valid")
}

fn square_zero(rng: &mut Rng64, p: u32, d: usize) -> MatFp {
    let s = random_invertible(rng, p, d);
    let si = s.inverse().expect("invertible");
    let mut e = MatFp::zeros(p, d, d);
    e.set(0, d - 1, nonzero(rng, p));
    s.mat_mul(&e).and_then(|x| x.mat_mul(&si)).expect("square")
}

/// Random square-zero pieces and Toeplitz pieces at random positions,
/// retried until valid.
pub fn random(p: u32, d: usize, seed: u64) -> Rep {
    let mut rng = rng(seed);
    if d < 2 {
        return Rep::trivial(p, d);
    }
    for _ in 0..256 {
        // all pieces are combinations of x y^T with x in U, y in U^perp
        let s = random_invertible(&mut rng, p, d);
        let si = s.inverse().expect("invertible");
        let half = d / 2;
        let mut blocks = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let mut core = MatFp::zeros(p, d, d);
            for a in 0..half {
                for b in half..d {
                    core.set(a, b, rng.gen_range(0..p));
                }
            }
            let m = s.mat_mul(&core).and_then(|x| x.mat_mul(&si)).expect("square");
            let (i, j) = (rng.gen_range(-2..=2), rng.gen_range(-2..=2));
            blocks.push(((i, j), m));
        }
        if rng.gen_bool(0.5) {
            // a perturbation that often breaks commutation, caught below
            let i = rng.gen_range(-1..=1);
            blocks.push(((i, i), square_zero(&mut rng, p, d)));
        }
        let Ok(a) = BlockMatrix::from_blocks(p, d, merge(p, d, blocks)) else {
            continue;
        };
        if a.is_zero() {
            continue;
        }
        if validate(&Rep::new(a.clone())).valid {
            return Rep::checked(a).expect("validated");
        }
    }
    single_block(p, d, seed)
}

fn merge(p: u32, d: usize, blocks: Vec<((i64, i64), MatFp)>) -> Vec<((i64, i64), MatFp)> {
    let mut map: std::collections::BTreeMap<(i64, i64), MatFp> = std::collections::BTreeMap::new();
    for (k, m) in blocks {
        let e = map.entry(k).or_insert_with(|| MatFp::zeros(p, d, d));
        *e = e.add(&m).expect("same shape");
    }
    map.into_iter().collect()
}

pub fn generate(family: Family, p: u32, d: usize, seed: u64) -> Rep {
    match family {
        Family::Toeplitz => toeplitz(p, d, seed),
        Family::SingleBlock => single_block(p, d, seed),
        Family::Random => random(p, d, seed),
    }
}

fn e_block(p: u32) -> MatFp {
    MatFp::from_rows(p, &[vec![0, 1], vec![0, 0]]).expect("2x2")
}

fn fixed(name: &str, family: &str, a: BlockMatrix) -> Instance {
    Instance {
        name: name.into(),
        family: family.into(),
        seed: None,
        rep: Rep::checked(a).expect("shipped instance is valid"),
    }
}

fn seeded(name: &str, family: Family, p: u32, d: usize, seed: u64) -> Instance {
    Instance {
        name: name.into(),
        family: family.name().into(),
        seed: Some(seed),
        rep: generate(family, p, d, seed),
    }
}

/// The shipped instance suite.
pub fn suite() -> Vec<Instance> {
    let jordan3 = MatFp::from_rows(3, &[vec![0, 1, 0], vec![0, 0, 1], vec![0, 0, 0]]).expect("3x3");
    let jordan3_sq = jordan3.pow(2).expect("square");
    vec![
        fixed("trivial-p2-d2", "trivial", BlockMatrix::zero(2, 2)),
        fixed("trivial-p5-d3", "trivial", BlockMatrix::zero(5, 3)),
        fixed("trivial-p3-d1", "trivial", BlockMatrix::zero(3, 1)),
        fixed("e2", "fixed", BlockMatrix::single(2, 2, 1, 0, e_block(2)).expect("block")),
        fixed("above-diagonal", "fixed", BlockMatrix::single(2, 2, 0, 1, e_block(2)).expect("block")),
        fixed("far-above-p3", "fixed", BlockMatrix::single(3, 2, -1, 1, e_block(3)).expect("block")),
        fixed("toeplitz-index2", "toeplitz", BlockMatrix::single(3, 2, 0, 0, e_block(3)).expect("block")),
        fixed(
            "toeplitz-index3",
            "toeplitz",
            BlockMatrix::from_blocks(3, 3, [((0, 0), jordan3.clone()), ((1, 0), jordan3_sq.clone())]).expect("blocks"),
        ),
        fixed(
            "toeplitz-index3-above",
            "toeplitz",
            BlockMatrix::from_blocks(
                3,
                3,
                [((0, 0), jordan3.scale(2)), ((-1, 0), jordan3_sq.clone()), ((2, 0), jordan3_sq)],
            )
            .expect("blocks"),
        ),
        seeded("toeplitz-p5-d3-s7", Family::Toeplitz, 5, 3, 7),
        seeded("single-block-p5-d2-s3", Family::SingleBlock, 5, 2, 3),
        seeded("single-block-p3-d3-s11", Family::SingleBlock, 3, 3, 11),
        seeded("random-p2-d2-s6", Family::Random, 2, 2, 6),
        seeded("random-p3-d3-s3", Family::Random, 3, 3, 3),
        seeded("random-p5-d3-s8", Family::Random, 5, 3, 8),
    ]
}

/// Random block matrix with `count` blocks placed in `[-w, w]^2`.
pub fn random_block_matrix(rng: &mut Rng64, p: u32, d: usize, w: i64, count: usize) -> BlockMatrix {
    let blocks: Vec<_> = (0..count)
        .map(|_| {
            let ij = (rng.gen_range(-w..=w), rng.gen_range(-w..=w));
            (ij, random_matrix(rng, p, d, d))
        })
        .collect();
    BlockMatrix::from_blocks(p, d, merge(p, d, blocks)).expect("window")
}

/// Exact vector with random coefficients on degrees `[lo, hi)`.
pub fn random_series(rng: &mut Rng64, p: u32, d: usize, lo: i64, hi: i64) -> SeriesVector {
    let coeffs = (lo..hi).map(|n| (n, (0..d).map(|_| rng.gen_range(0..p)).collect()));
    SeriesVector::exact(p, d, coeffs).expect("window")
}

/// A random tidy subgroup of depth `depth` spanned with `tau^depth L` by a
/// few random generators supported in `[-depth, depth)`.
pub fn random_tidy(rng: &mut Rng64, p: u32, d: usize, depth: i64) -> Result<CompactOpenSubgroup> {
    let count = rng.gen_range(1..=d + 1);
    let gens: Vec<SeriesVector> = (0..count)
        .map(|_| {
            let lo = rng.gen_range(-depth..depth);
            random_series(rng, p, d, lo, (lo + 2).min(depth))
        })
        .collect();
    CompactOpenSubgroup::module_span(p, d, depth, &gens)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_are_valid_and_deterministic() {
        for family in [Family::Toeplitz, Family::SingleBlock, Family::Random] {
            for (p, d) in [(2, 1), (2, 2), (3, 2), (3, 3), (5, 3)] {
                for seed in 0..4 {
                    let a = generate(family, p, d, seed);
                    assert!(validate(&a).valid, "{family:?} {p} {d} {seed}");
                    assert_eq!(a, generate(family, p, d, seed));
                }
            }
        }
    }

    #[test]
    fn suite_shape() {
        let s = suite();
        assert!(s.len() >= 12);
        assert!(s.iter().any(|i| !i.rep.generator().is_zero() && i.rep.modulus() == 5));
    }
}
