use std::fs;
use std::path::PathBuf;

use pddlforge::audit::{audit_domain, AuditConfig};
use pddlforge::pddl::{parse_domain, print_domain};

fn fixture(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name).join("reference.pddl");
    fs::read_to_string(p).unwrap()
}

#[test]
fn fixture_domains_are_canonical_and_clean() {
    for (name, actions) in [("blocksworld", 4), ("logistics", 6), ("tyreworld", 13), ("household", 22)] {
        let text = fixture(name);
        let d = parse_domain(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(d.actions.len(), actions, "{name}");
        let printed = print_domain(&d);
        assert_eq!(parse_domain(&printed).unwrap(), d, "{name}");
        assert_eq!(print_domain(&parse_domain(&printed).unwrap()), printed, "{name}");
        let report = audit_domain(&d, AuditConfig::default());
        assert!(report.clean, "{name}: {:#?}", report.findings);
    }
}
