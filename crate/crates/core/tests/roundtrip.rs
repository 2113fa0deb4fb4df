use std::path::PathBuf;

use ifc_mcp::model::IfcModel;
use ifc_mcp::step::{parse_step, write_step, GuidGenerator};
use regex::Regex;

fn fixtures() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "ifc"))
        .collect();
    v.sort();
    assert!(v.len() >= 6);
    v
}

#[test]
fn write_parse_write_is_a_fixpoint() {
    let ids = Regex::new(r"(?m)^\s*#(\d+)\s*=").unwrap();
    for path in fixtures() {
        let raw = std::fs::read(&path).unwrap();
        let expected = ids.captures_iter(std::str::from_utf8(&raw).unwrap()).count();
        let (h, ents) = parse_step(&raw).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(ents.len(), expected, "{}", path.display());
        let once = write_step(&h, &ents).unwrap();
        let (h2, ents2) = parse_step(&once).unwrap();
        assert_eq!(ents, ents2, "{}", path.display());
        assert_eq!(once, write_step(&h2, &ents2).unwrap(), "{}", path.display());
    }
}

#[test]
fn fixtures_load_as_models_and_save_stably() {
    for path in fixtures() {
        let raw = std::fs::read(&path).unwrap();
        let mut m = IfcModel::from_step(&raw, GuidGenerator::seeded(0))
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let a = m.to_step().unwrap();
        let mut again = IfcModel::from_step(&a, GuidGenerator::seeded(0)).unwrap();
        assert_eq!(a, again.to_step().unwrap(), "{}", path.display());
    }
}

#[test]
fn handwritten_escapes_decode() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/handwritten.ifc");
    let (h, ents) = parse_step(&std::fs::read(path).unwrap()).unwrap();
    assert_eq!(h.author, vec!["J. O'Neil".to_string()]);
    assert_eq!(h.organization, vec!["Studio \u{c4}hnlich".to_string()]);
    let project = format!("{:?}", ents[&100]);
    assert!(project.contains("Caf\u{e9} extension"), "{project}");
    assert_eq!(ents[&150].class_name.to_ascii_uppercase(), "IFCCOLUMN");
}
