//! End-to-end checks of the command-line front door: round trips between
//! subcommands, exit codes, report validation, and byte-level determinism of
//! repeated runs.

use std::path::Path;
use std::process::{Command, Output};

fn tfu(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tfu"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn generate_compute_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{
        "zeta": 0.15915494309189535,
        "eps": 1.0,
        "x0": [0.0],
        "w0": [0.0],
        "partition": {"j1": [1]}
    }"#;
    std::fs::write(dir.path().join("spec.json"), spec).unwrap();

    let out = tfu(
        &["generate", "--chirp", "spec.json", "--out", "f.csv"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let out = tfu(
        &["compute", "--signal", "f.csv", "--kernel", "unit", "--out", "wd.csv"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let d = tfu_core::io::load_distribution(&dir.path().join("wd.csv")).expect("parses");
    assert_eq!(d.kernel_tag(), "unit");
    assert_eq!(d.time_grid().count(), &[256]);

    // binary output parses identically
    let out = tfu(
        &["compute", "--signal", "f.csv", "--kernel", "krd", "--out", "wd.bin"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0);
    let db = tfu_core::io::load_distribution(&dir.path().join("wd.bin")).expect("parses");
    assert_eq!(db.kernel_tag(), "krd");
}

#[test]
fn theorem_t1_reports_equality() {
    let dir = tempfile::tempdir().unwrap();
    let out = tfu(
        &[
            "verify",
            "--theorem",
            "T1",
            "--zeta",
            "0.159154943",
            "--kernel",
            "unit",
            "--out",
            "t1.json",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("t1.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["verdict"], "equality");
    assert_eq!(value["case"], "T1");

    // the report subcommand accepts and summarizes it
    let out = tfu(&["report", "--in", "t1.json"], dir.path());
    assert_eq!(exit_code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("equality"));
}

#[test]
fn flandrin_suite_passes_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let out = tfu(
        &["verify", "--suite", "flandrin", "--grid", "256:-8:8", "--out", "r.json"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = tfu(&["report", "--in", "r.json"], dir.path());
    assert_eq!(exit_code(&out), 0);
}

#[test]
fn suite_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.json", "b.json"] {
        let out = tfu(
            &["verify", "--suite", "all", "--seed", "7", "--out", name],
            dir.path(),
        );
        assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    let b = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b, "reports must be byte-identical across runs");

    // capping the worker pool must not change a single byte
    let out = Command::new(env!("CARGO_BIN_EXE_tfu"))
        .args(["verify", "--suite", "all", "--seed", "7", "--out", "c.json"])
        .env("TFU_THREADS", "1")
        .current_dir(dir.path())
        .output()
        .expect("binary runs");
    assert_eq!(exit_code(&out), 0);
    let c = std::fs::read(dir.path().join("c.json")).unwrap();
    assert_eq!(a, c, "thread cap must not affect results");
}

#[test]
fn usage_and_io_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();

    // unknown kernel name
    std::fs::write(dir.path().join("empty.csv"), "# grid origin=0 spacing=1 count=4 domain=time\n0,0,0\n").unwrap();
    let out = tfu(
        &["compute", "--signal", "empty.csv", "--kernel", "nonsense", "--out", "x.csv"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("kernel"));

    // unreadable signal path
    let out = tfu(
        &["compute", "--signal", "missing.csv", "--kernel", "unit", "--out", "x.csv"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 2);

    // malformed grid flag
    let out = tfu(&["verify", "--suite", "lemmas", "--grid", "bogus"], dir.path());
    assert_eq!(exit_code(&out), 2);

    // verify without a mode
    let out = tfu(&["verify"], dir.path());
    assert_eq!(exit_code(&out), 2);

    // non-positive tolerance override
    let out = tfu(
        &["verify", "--suite", "flandrin", "--tol", "-1"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 2);

    // mangled report file
    std::fs::write(dir.path().join("bad.json"), "{\"schema\": 1}").unwrap();
    let out = tfu(&["report", "--in", "bad.json"], dir.path());
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn theorem_preconditions_surface_as_errors() {
    let dir = tempfile::tempdir().unwrap();
    // a chirp kernel is not admissible for the real-kernel case
    let out = tfu(
        &["verify", "--theorem", "T1", "--kernel", "timemul:quad(2)"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("precondition"));
}
