//! End-to-end tests of the `ontolab` binary: exit-code contract (0 holds,
//! 1 fails with witness, 2 input error), JSON report output, and emitted
//! artifact stability.

use std::path::PathBuf;
use std::process::{Command, Output};

fn example(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("examples")
        .join(name)
        .display()
        .to_string()
}

fn ontolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ontolab"))
        .args(args)
        .env_remove("ONTOLAB_MAX_GLOBAL_ASSIGNMENTS")
        .output()
        .expect("binary runs")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn classify_property_reports_epistemic_with_witness() {
    let out = ontolab(&["check", &example("fuzzy_coins.json"), "classify-property"]);
    assert_eq!(exit_code(&out), 1, "epistemic counts as a failing check");
    let text = stdout(&out);
    assert!(text.contains("epistemic"));
    assert!(text.contains("GW"));
}

#[test]
fn hs_supports_agrees_with_classification() {
    let out = ontolab(&["check", &example("fuzzy_coins.json"), "hs-supports"]);
    assert_eq!(exit_code(&out), 1);
    assert!(stdout(&out).contains("overlapping-supports"));
}

#[test]
fn pr_box_checks() {
    let pr = example("pr_box.json");
    assert_eq!(exit_code(&ontolab(&["check", &pr, "no-signalling"])), 0);

    let out = ontolab(&["--json", "check", &pr, "local-realizable"]);
    assert_eq!(exit_code(&out), 1);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["holds"], serde_json::json!(false));
    assert_eq!(report["verdict"], serde_json::json!("not-locally-realizable"));
    let cert = &report["details"]["preparations"]["pr"]["certificate"];
    assert!(cert["table_pairing"].as_str().unwrap().starts_with('-'));

    // the signed decomposition exists, so the quasi check holds
    let out = ontolab(&["--json", "check", &pr, "quasi-decompose"]);
    assert_eq!(exit_code(&out), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let negatives = report["details"]["preparations"]["pr"]["negative_entries"]
        .as_u64()
        .unwrap();
    assert!(negatives >= 1);
}

#[test]
fn signalling_box_fails_both_table_checks() {
    let path = example("signalling_box.json");
    let out = ontolab(&["check", &path, "no-signalling"]);
    assert_eq!(exit_code(&out), 1);
    assert!(stdout(&out).contains("witness"));
    assert_eq!(exit_code(&ontolab(&["check", &path, "quasi-decompose"])), 1);
}

#[test]
fn preparation_checks_separate_the_two_conditions() {
    let correlated = example("correlated_preparation.json");
    assert_eq!(exit_code(&ontolab(&["check", &correlated, "prep-independent"])), 1);
    assert_eq!(exit_code(&ontolab(&["check", &correlated, "no-prep-signalling"])), 0);

    let product = example("product_preparation.json");
    assert_eq!(exit_code(&ontolab(&["check", &product, "prep-independent"])), 0);
    assert_eq!(exit_code(&ontolab(&["check", &product, "no-prep-signalling"])), 0);
}

#[test]
fn steering_checks() {
    let out = ontolab(&["check", &example("steering_disjoint.json"), "steering"]);
    assert_eq!(exit_code(&out), 1);
    assert!(stdout(&out).contains("mixture-equality-impossible"));

    let out = ontolab(&["check", &example("steering_overlapping.json"), "steering"]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).contains("consistent"));
}

#[test]
fn model_checks_on_psi_complete_and_local_models() {
    let epr = example("psi_complete_epr.json");
    assert_eq!(exit_code(&ontolab(&["check", &epr, "deterministic"])), 1);
    assert_eq!(exit_code(&ontolab(&["check", &epr, "parameter-independent"])), 0);
    let out = ontolab(&["check", &epr, "local"]);
    assert_eq!(exit_code(&out), 1);
    assert!(stdout(&out).contains("not-deterministic"));

    let local = example("local_deterministic.json");
    assert_eq!(exit_code(&ontolab(&["check", &local, "deterministic"])), 0);
    assert_eq!(exit_code(&ontolab(&["check", &local, "local"])), 0);
    assert_eq!(exit_code(&ontolab(&["check", &local, "factorisable"])), 0);
}

#[test]
fn bell_model_tables_are_quantum_and_realizability_depends_on_angles() {
    // the Z/X Bell-state table is local; the tilted CHSH table is not
    let bell = example("psi_complete_bell.json");
    assert_eq!(exit_code(&ontolab(&["check", &bell, "local"])), 1);

    let chsh = example("chsh_quantum.json");
    assert_eq!(exit_code(&ontolab(&["check", &chsh, "no-signalling"])), 0);
    assert_eq!(exit_code(&ontolab(&["check", &chsh, "local-realizable"])), 1);
}

#[test]
fn quantum_level_model_files_are_accepted() {
    let path = example("psi_complete_epr_quantum.json");
    let out = ontolab(&["check", &path, "local"]);
    assert_eq!(exit_code(&out), 1);
    assert!(stdout(&out).contains("not-deterministic"));
    assert_eq!(exit_code(&ontolab(&["check", &path, "parameter-independent"])), 0);
}

#[test]
fn canonicalize_writes_a_stable_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("canonical.json");
    let out = ontolab(&[
        "canonicalize",
        &example("local_deterministic.json"),
        "-o",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);

    let text = std::fs::read_to_string(&out_path).unwrap();
    let file: ontolab::json::CanonicalFile = serde_json::from_str(&text).unwrap();
    let model = file.model.to_domain().unwrap();
    assert!(model.locality().holds());
    // two of the three original states share a generator and merge
    assert_eq!(model.states().len(), 2);
    assert_eq!(file.collapse.len(), 3);

    // byte-stable round trip of the emitted artifact
    let re_emitted = ontolab::json::to_json_string(&ontolab::json::CanonicalFile {
        model: ontolab::json::ModelFile::from_domain(&model),
        collapse: file.collapse.clone(),
    });
    assert_eq!(re_emitted, text);
}

#[test]
fn canonicalize_rejects_non_local_models() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("unused.json");
    let out = ontolab(&[
        "canonicalize",
        &example("psi_complete_epr.json"),
        "-o",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 1);
    assert!(stdout(&out).contains("not-local"));
    assert!(!out_path.exists());
}

#[test]
fn localize_command() {
    assert_eq!(exit_code(&ontolab(&["localize", &example("pr_box.json")])), 1);
    assert_eq!(
        exit_code(&ontolab(&["localize", &example("noisy_pr_box_half.json")])),
        0
    );
    assert_eq!(
        exit_code(&ontolab(&["localize", &example("pr_box.json"), "-p", "nope"])),
        2
    );
}

#[test]
fn demos_exit_zero() {
    for name in ["epr", "steering", "prep-relaxation"] {
        let out = ontolab(&["demo", name]);
        assert_eq!(exit_code(&out), 0, "demo {name} failed: {}", stdout(&out));
    }
    assert_eq!(exit_code(&ontolab(&["demo", "bogus"])), 2);
}

#[test]
fn demo_epr_reports_the_corollary() {
    let out = ontolab(&["--json", "demo", "epr"]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(
        report["verdict"],
        serde_json::json!("psi-complete model is non-local")
    );
    assert_eq!(
        report["details"]["observables"]["Z"]["classification"],
        serde_json::json!("epistemic")
    );
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(exit_code(&ontolab(&["check", "no-such-file.json", "local"])), 2);
    assert_eq!(
        exit_code(&ontolab(&["check", &example("pr_box.json"), "no-such-check"])),
        2
    );
    // schema mismatch: a property file fed to a model check
    assert_eq!(
        exit_code(&ontolab(&["check", &example("fuzzy_coins.json"), "local"])),
        2
    );
}

#[test]
fn assignment_cap_env_var_is_honored() {
    let out = Command::new(env!("CARGO_BIN_EXE_ontolab"))
        .args(["localize", &example("pr_box.json")])
        .env("ONTOLAB_MAX_GLOBAL_ASSIGNMENTS", "8")
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("16"), "stderr should mention the count: {err}");
}

#[test]
fn reports_carry_input_digests() {
    let out = ontolab(&["--json", "check", &example("pr_box.json"), "no-signalling"]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let digest = report["input"]["sha256"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
    assert!(report["input"]["path"].as_str().unwrap().ends_with("pr_box.json"));
}
