//! The semidirect product `F_p((t))^d x| F_p((t))` with
//! `(z1, f1)(z2, f2) = (z1 + phi(f1) z2, f1 + f2)`, on which
//! `(z, f) -> (tau z, t f)` is a contractive automorphism.

use crate::error::{Error, Result};
use crate::fp::MatFp;
use crate::laurent::{Precision, SeriesVector};
use crate::rep::{normalize, phi_apply, Rep};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SDElement {
    pub z: SeriesVector,
    pub f: SeriesVector,
}

impl SDElement {
    pub fn new(rep: &Rep, z: SeriesVector, f: SeriesVector) -> Result<Self> {
        if z.dim() != rep.dim() || f.dim() != 1 {
            return Err(Error::Dimension(format!(
                "components of dimensions {} and {} for d = {}",
                z.dim(),
                f.dim(),
                rep.dim()
            )));
        }
        if z.modulus() != rep.modulus() || f.modulus() != rep.modulus() {
            return Err(Error::ModulusMismatch(z.modulus(), rep.modulus()));
        }
        Ok(SDElement { z, f })
    }

    pub fn identity(rep: &Rep) -> Self {
        SDElement {
            z: SeriesVector::zero(rep.modulus(), rep.dim()),
            f: SeriesVector::zero(rep.modulus(), 1),
        }
    }

    pub fn normal(rep: &Rep, z: SeriesVector) -> Result<Self> {
        Self::new(rep, z, SeriesVector::zero(rep.modulus(), 1))
    }

    pub fn twist(rep: &Rep, f: SeriesVector) -> Result<Self> {
        Self::new(rep, SeriesVector::zero(rep.modulus(), rep.dim()), f)
    }

    /// True iff both components vanish on their known windows.
    pub fn is_identity(&self) -> bool {
        self.z.is_zero() && self.f.is_zero()
    }

    pub fn prec(&self) -> Precision {
        self.z.prec().min(self.f.prec())
    }
}

pub fn sd_mul(rep: &Rep, x: &SDElement, y: &SDElement) -> Result<SDElement> {
    let moved = phi_apply(rep, &x.f, &y.z)?;
    Ok(SDElement {
        z: x.z.add(&moved)?,
        f: x.f.add(&y.f)?,
    })
}

/// `(-phi(-f) z, -f)`.
pub fn sd_inv(rep: &Rep, x: &SDElement) -> Result<SDElement> {
    let f = x.f.neg();
    Ok(SDElement {
        z: phi_apply(rep, &f, &x.z)?.neg(),
        f,
    })
}

/// `x y x^{-1} y^{-1}`.
pub fn sd_commutator(rep: &Rep, x: &SDElement, y: &SDElement) -> Result<SDElement> {
    let xy = sd_mul(rep, x, y)?;
    let xyx = sd_mul(rep, &xy, &sd_inv(rep, x)?)?;
    sd_mul(rep, &xyx, &sd_inv(rep, y)?)
}

/// `(tau z, t f)`.
pub fn contraction_auto(x: &SDElement) -> Result<SDElement> {
    Ok(SDElement {
        z: x.z.shift(1)?,
        f: x.f.shift(1)?,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CentralReport {
    pub central: bool,
    /// Shifts `r` of the generators `(0, t^r)` that were tested.
    pub checked: Vec<i64>,
    /// First `r` with `[(xi, 0), (0, t^r)] != 1`.
    pub witness: Option<i64>,
}

/// Tests that `(xi, 0)` commutes with `(0, t^r)` for every `r` that can act
/// on `xi`; it commutes with the abelian normal part automatically.
pub fn central_certificate(rep: &Rep, xi: &SeriesVector) -> Result<CentralReport> {
    rep.require_valid()?;
    if xi.is_zero() {
        return Err(Error::Dimension("central_certificate needs xi != 0".into()));
    }
    let p = rep.modulus();
    let mut rs: Vec<i64> = (-4..=4).collect();
    if let (Some(w), Some(lo), Some(hi)) = (rep.generator().window(), xi.min_degree(), xi.max_degree()) {
        let hi = match xi.prec() {
            Precision::Finite(n) => n - 1,
            Precision::Exact => hi,
        };
        rs.extend((lo - w.j_max)..=(hi - w.j_min));
    }
    rs.sort_unstable();
    rs.dedup();
    let x = SDElement::normal(rep, xi.clone())?;
    for &r in &rs {
        let g = SDElement::twist(rep, SeriesVector::monomial(p, 1, 0, r, 1))?;
        if !sd_commutator(rep, &x, &g)?.is_identity() {
            return Ok(CentralReport {
                central: false,
                checked: rs.iter().copied().take_while(|&s| s <= r).collect(),
                witness: Some(r),
            });
        }
    }
    Ok(CentralReport {
        central: true,
        checked: rs,
        witness: None,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassReport {
    pub precision: i64,
    /// `Some(k)`: class at most `k` modulo `t^N`.
    pub class: Option<usize>,
    /// Set when the filtration did not reach zero within the cap.
    pub at_least: Option<usize>,
    /// Dimensions of `gamma_2, gamma_3, ...` modulo `t^N`.
    pub dims: Vec<usize>,
}

impl std::fmt::Display for ClassReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.class, self.at_least) {
            (Some(k), _) => write!(f, "class <= {k} at precision {}", self.precision),
            (None, Some(k)) => write!(f, "class >= {k} at precision {}", self.precision),
            _ => write!(f, "class unknown at precision {}", self.precision),
        }
    }
}

fn span_rows(p: u32, n: usize, rows: Vec<Vec<u32>>) -> Vec<Vec<u32>> {
    if rows.is_empty() {
        return rows;
    }
    let m = MatFp::from_row_vectors(p, n, &rows);
    let (r, piv) = m.rref();
    (0..piv.len()).map(|i| r.row(i)).collect()
}

/// Lower central series of `H = F_p[[t]]^d x| F_p[[t]]` modulo `t^N`.
///
/// The representation is first conjugated so that every `phi(f)`,
/// `f in F_p[[t]]`, is lower triangular; then each `phi(f)` preserves every
/// `t^n F_p[[t]]^d`. Commutators land in the normal part, where
/// `gamma_{k+1}` is the closure of `gamma_k` under the maps `phi(t^r) - I`.
pub fn nilpotency_class(rep: &Rep, n: i64, max_class: usize, depth: i64) -> Result<ClassReport> {
    rep.require_valid()?;
    if !(1..=512).contains(&n) {
        return Err(Error::Precision(format!("precision {n} outside [1, 512]")));
    }
    let inner = normalize(rep, depth)?.reduced.inner;
    let p = rep.modulus();
    let d = rep.dim();
    let size = n as usize * d;
    let a0 = inner.generator();
    let mut gens: Vec<MatFp> = Vec::new();
    if let Some(w) = a0.window() {
        for r in 0..(n - w.i_min).max(0) {
            let mut m = MatFp::zeros(p, size, size);
            for ((i, j), blk) in a0.blocks() {
                let (row, col) = (i + r, j + r);
                if !(0..n).contains(&row) || !(0..n).contains(&col) {
                    continue;
                }
                for a in 0..d {
                    for b in 0..d {
                        m.set(row as usize * d + a, col as usize * d + b, blk.get(a, b));
                    }
                }
            }
            if !m.is_zero() {
                gens.push(m);
            }
        }
    }
    let apply_all = |rows: &[Vec<u32>]| -> Result<Vec<Vec<u32>>> {
        let mut out = Vec::new();
        for g in &gens {
            for v in rows {
                let w = g.mul_vec(v)?;
                if w.iter().any(|&x| x != 0) {
                    out.push(w);
                }
            }
        }
        Ok(out)
    };
    let mut current: Vec<Vec<u32>> = (0..size)
        .map(|i| {
            let mut v = vec![0; size];
            v[i] = 1;
            v
        })
        .collect();
    let mut dims = Vec::new();
    for k in 1..=max_class {
        // gamma_{k+1}: images of gamma_k, closed under the generators
        let mut next = span_rows(p, size, apply_all(&current)?);
        loop {
            let mut grown = next.clone();
            grown.extend(apply_all(&next)?);
            let grown = span_rows(p, size, grown);
            if grown.len() == next.len() {
                break;
            }
            next = grown;
        }
        dims.push(next.len());
        if next.is_empty() {
            return Ok(ClassReport {
                precision: n,
                class: Some(k),
                at_least: None,
                dims,
            });
        }
        current = next;
    }
    Ok(ClassReport {
        precision: n,
        class: None,
        at_least: Some(max_class + 1),
        dims,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::endo::BlockMatrix;

    fn e2() -> Rep {
        let e = MatFp::from_rows(2, &[vec![0, 1], vec![0, 0]]).unwrap();
        Rep::checked(BlockMatrix::single(2, 2, 1, 0, e).unwrap()).unwrap()
    }

    #[test]
    fn products_and_inverses() {
        let rep = e2();
        let z = SeriesVector::monomial(2, 2, 1, 0, 1);
        let f = SeriesVector::exact(2, 1, [(0, vec![1]), (3, vec![1])]).unwrap();
        let x = SDElement::new(&rep, z.clone(), f.clone()).unwrap();
        let id = SDElement::identity(&rep);
        assert_eq!(sd_mul(&rep, &x, &id).unwrap(), x);
        assert!(sd_mul(&rep, &x, &sd_inv(&rep, &x).unwrap()).unwrap().is_identity());
        let y = SDElement::normal(&rep, z.clone()).unwrap();
        let g = SDElement::twist(&rep, f.clone()).unwrap();
        let conj = sd_mul(&rep, &sd_mul(&rep, &g, &y).unwrap(), &sd_inv(&rep, &g).unwrap()).unwrap();
        assert_eq!(conj.z, phi_apply(&rep, &f, &z).unwrap());
        assert!(conj.f.is_zero());
    }

    #[test]
    fn central_examples() {
        let rep = e2();
        assert!(central_certificate(&rep, &SeriesVector::monomial(2, 2, 0, 0, 1)).unwrap().central);
        let bad = central_certificate(&rep, &SeriesVector::monomial(2, 2, 1, 0, 1)).unwrap();
        assert_eq!(bad.witness, Some(0));
    }

    #[test]
    fn class_examples() {
        let r = nilpotency_class(&Rep::trivial(3, 2), 8, 4, 32).unwrap();
        assert_eq!(r.class, Some(1));
        let r = nilpotency_class(&e2(), 16, 4, 32).unwrap();
        assert_eq!(r.class, Some(2));
        assert_eq!(r.to_string(), "class <= 2 at precision 16");
    }
}
