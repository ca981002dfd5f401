use contraction::format::{InstanceFile, Metadata};
use contraction::instances::suite;

#[test]
fn shipped_fixtures_match_suite() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("instances");
    let suite = suite();
    let on_disk = std::fs::read_dir(&dir).unwrap().count();
    assert_eq!(on_disk, suite.len());
    for inst in suite {
        let path = dir.join(format!("{}.json", inst.name));
        let text = std::fs::read_to_string(&path).unwrap();
        let meta = Metadata {
            name: Some(inst.name.clone()),
            family: Some(inst.family.clone()),
            seed: inst.seed,
        };
        assert_eq!(text, InstanceFile::from_generator(inst.rep.generator(), Some(meta)).to_json(), "{}", inst.name);
        let parsed = InstanceFile::parse(&text, &inst.name).unwrap();
        assert_eq!(parsed.rep().unwrap(), inst.rep);
    }
}
