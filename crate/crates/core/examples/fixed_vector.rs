//! Solves every shipped instance and compares with the brute-force oracle.

use contraction::instances::suite;
use contraction::solver::{oracle_fixed_vector, solve, SolveOptions};

fn main() -> contraction::Result<()> {
    let opts = SolveOptions::default();
    for inst in suite() {
        let res = solve(&inst.rep, &opts)?;
        let oracle = oracle_fixed_vector(&inst.rep, -4, 4)?;
        println!(
            "{:<24} branch {:<10} xi = {}  residuals ok: {}  oracle kernel dim {}",
            inst.name,
            res.trace.branch,
            res.xi,
            res.residuals.iter().all(|r| r.pass),
            oracle.kernel_dim
        );
    }
    Ok(())
}
