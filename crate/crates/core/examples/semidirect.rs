//! The semidirect product, its contracting automorphism, centrality of the
//! fixed vector, and the nilpotency class of the compact open subgroup.

use contraction::format::parse_poly;
use contraction::group::{central_certificate, contraction_auto, nilpotency_class, sd_commutator, sd_mul, SDElement};
use contraction::instances::suite;
use contraction::laurent::SeriesVector;
use contraction::solver::{solve, SolveOptions};

fn main() -> contraction::Result<()> {
    let inst = suite().into_iter().find(|i| i.name == "toeplitz-index3").expect("shipped");
    let rep = &inst.rep;
    let x = SDElement::new(rep, SeriesVector::monomial(3, 3, 2, 0, 1), parse_poly(3, "t")?)?;
    let y = SDElement::twist(rep, parse_poly(3, "1 + 2*t^2")?)?;
    println!("x y      = {}", sd_mul(rep, &x, &y)?.z);
    println!("[x, y]   = {}", sd_commutator(rep, &x, &y)?.z);
    let mut g = x.clone();
    for k in 1..=4 {
        g = contraction_auto(&g)?;
        println!("alpha^{k}(x) = ({}, {})", g.z, g.f);
    }

    let xi = solve(rep, &SolveOptions::default())?.xi;
    let cert = central_certificate(rep, &xi)?;
    println!("xi = {xi} central: {} (checked r in {:?})", cert.central, cert.checked);
    println!("{}", nilpotency_class(rep, 12, 6, 64)?);
    Ok(())
}
