//! Compact open subgroups, their indices, and the adapted basis change.

use contraction::endo::{change_basis, CompactOpenSubgroup};
use contraction::laurent::SeriesVector;

fn main() -> contraction::Result<()> {
    let (p, d) = (3, 2);
    let l = CompactOpenSubgroup::standard(p, d);
    let g = SeriesVector::exact(p, d, [(-1, vec![1, 2]), (0, vec![0, 1])])?;
    let v = CompactOpenSubgroup::module_span(p, d, 2, std::slice::from_ref(&g))?;
    println!("V has depth {} and dimension {} over F_p", v.depth(), v.dim());
    println!("[V : tau V] = {}", v.index(&v.shifted(1)?)?);
    println!("[V + L : L] = {}", v.sum(&l)?.index(&l)?);
    println!("V contains g: {}", v.contains_vector(&g)?);

    let cb = change_basis(&v)?;
    let z = SeriesVector::exact(p, d, [(0, vec![1, 0]), (2, vec![2, 1])])?;
    let image = cb.theta.apply(&z, 8)?;
    println!("theta z mod t^8 = {image}");
    println!("theta z lies in V: {}", v.contains_vector(&image)?);
    println!("theta^-1 theta z = {}", cb.theta_inv.apply(&cb.matrix.apply(&z)?, 8)?);
    Ok(())
}
