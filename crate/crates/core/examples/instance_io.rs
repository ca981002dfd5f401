//! Writes every shipped instance as JSON, reads it back, and solves it.
//!
//! `cargo run --example instance_io -- DIR` writes the files into `DIR`.

use contraction::format::{InstanceFile, Metadata, ResultFile};
use contraction::instances::suite;
use contraction::solver::{solve, SolveOptions};

fn main() -> contraction::Result<()> {
    let dir = std::env::args().nth(1);
    for inst in suite() {
        let meta = Metadata {
            name: Some(inst.name.clone()),
            family: Some(inst.family.clone()),
            seed: inst.seed,
        };
        let text = InstanceFile::from_generator(inst.rep.generator(), Some(meta)).to_json();
        let back = InstanceFile::parse(&text, &inst.name)?.rep()?;
        assert_eq!(back, inst.rep);
        let res = solve(&back, &SolveOptions::default())?;
        let json = ResultFile::from_result(&res, None);
        println!("{:<24} exact={} xi={}", inst.name, json.exact, res.xi);
        if let Some(dir) = &dir {
            let path = std::path::Path::new(dir).join(format!("{}.json", inst.name));
            std::fs::write(&path, text).map_err(|e| contraction::Error::Io(e.to_string()))?;
        }
    }
    Ok(())
}
