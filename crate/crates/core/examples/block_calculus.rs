//! Block matrices acting on F_p((t))^d, shift conjugation, and phi(f) - I.

use contraction::endo::BlockMatrix;
use contraction::format::parse_poly;
use contraction::fp::MatFp;
use contraction::laurent::SeriesVector;
use contraction::rep::{phi_apply, phi_minus_id, validate, Rep};

fn main() -> contraction::Result<()> {
    let e = MatFp::from_rows(2, &[vec![0, 1], vec![0, 0]])?;
    let a0 = BlockMatrix::single(2, 2, 1, 0, e)?;
    let report = validate(&Rep::new(a0.clone()));
    println!("valid: {}, commutation range {:?}", report.valid, report.commutation_range);
    let rep = Rep::checked(a0.clone())?;

    let z = SeriesVector::exact(2, 2, [(0, vec![0, 1]), (3, vec![1, 1])])?;
    println!("z            = {z}");
    println!("A0 z         = {}", a0.apply(&z)?);
    println!("A0^(2) z     = {}", a0.shift_conjugate(2)?.apply(&z)?);

    let f = parse_poly(2, "1 + t^2")?;
    let m = phi_minus_id(&rep, &f)?;
    println!("phi(f) - I has blocks at {:?}", m.blocks().keys().collect::<Vec<_>>());
    println!("phi(f) z     = {}", phi_apply(&rep, &f, &z)?);

    // a truncated input gives an output with a smaller, honest precision
    let zt = z.truncate(2);
    let out = phi_apply(&rep, &f, &zt)?;
    println!("phi(f) (z mod t^2) = {out}");
    Ok(())
}
