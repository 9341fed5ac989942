//! Cross-module format checks: generated reports validate against the
//! shipped schemas, and the chirp specification JSON round-trips.

use std::collections::BTreeMap;
use tfu_core::io::validate_schema;
use tfu_core::suites::{run_suite, SuiteConfig};
use tfu_core::{ChirpSpec, Grid, Partition};

fn schema(name: &str) -> serde_json::Value {
    let path = format!("{}/../../schemas/{name}", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_str(&std::fs::read_to_string(path).expect("schema file"))
        .expect("schema parses")
}

#[test]
fn suite_report_validates_against_the_shipped_schema() {
    let cfg = SuiteConfig { seed: 3, ..SuiteConfig::default() };
    let report = run_suite("theorems", &cfg).unwrap();
    let value: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    validate_schema(&value, &schema("report.schema.json")).expect("report matches schema");
}

#[test]
fn bound_report_validates_against_the_shipped_schema() {
    let cfg = SuiteConfig::default();
    let report = tfu_core::suites::run_theorem_case(
        tfu_core::TheoremCase::T1,
        1.0 / (2.0 * std::f64::consts::PI),
        1.0,
        None,
        &cfg,
    )
    .unwrap();
    let value = serde_json::to_value(&report).unwrap();
    validate_schema(&value, &schema("bound_report.schema.json")).expect("bound report matches");
    assert_eq!(value["verdict"], "equality");
}

#[test]
fn chirp_spec_json_round_trip() {
    let mut offsets = BTreeMap::new();
    offsets.insert("-".to_string(), 0.25);
    let spec = ChirpSpec {
        zeta: 1.0,
        eps: 0.5,
        x0: vec![0.1],
        w0: vec![-0.2],
        amp_offset: 0.3,
        phase_offsets: offsets,
        partition: Partition { j1: vec![], j2: vec![], j3: vec![1], j4: vec![] },
    };
    let json = serde_json::to_string_pretty(&spec).unwrap();
    let back: ChirpSpec = serde_json::from_str(&json).unwrap();
    assert_eq!(back.zeta, spec.zeta);
    assert_eq!(back.eps, spec.eps);
    assert_eq!(back.x0, spec.x0);
    assert_eq!(back.w0, spec.w0);
    assert_eq!(back.phase_offsets, spec.phase_offsets);
    assert_eq!(back.partition.j3, vec![1]);

    // minimal spec with defaults
    let minimal: ChirpSpec = serde_json::from_str(
        r#"{"zeta": 0.159154943091895, "eps": 1.0, "x0": [0.0], "w0": [0.0],
            "partition": {"j1": [1]}}"#,
    )
    .unwrap();
    assert_eq!(minimal.amp_offset, 0.0);
    assert!(minimal.phase_offsets.is_empty());
    let grid = Grid::line(-8.0, 8.0, 128).unwrap();
    assert!(tfu_core::optimal_chirp(&minimal, &grid).is_ok());
}
