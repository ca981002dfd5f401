use std::io::Write;

use contraction::acceptance::run_all;

#[test]
fn acceptance() {
    let outcomes = run_all();
    // written directly so the lines survive output capture
    let mut err = std::io::stderr().lock();
    for o in &outcomes {
        writeln!(err, "{o}").unwrap();
    }
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
