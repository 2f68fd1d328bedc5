//! End-to-end checks of the command-line interface: exit codes, file
//! artifacts and determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn qarith(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qarith"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("qarith-cli-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn synth_writes_qasm_and_report() {
    let out = tmp("inc.qasm");
    let res = qarith(&[
        "synth",
        "incrementer",
        "--n",
        "8",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("incrementer n=8"));
    let qasm = std::fs::read_to_string(&out).unwrap();
    assert!(qasm.starts_with("OPENQASM 2.0;\nqreg q[9];\n"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.with_extension("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["qubits_dirty"], 1);
    assert_eq!(report["qubits_clean"], 0);
}

#[test]
fn synth_comparator_reports_no_ancillas() {
    let res = qarith(&["synth", "comparator", "--n", "4"]);
    assert!(res.status.success());
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("clean=0 dirty=0"));
}

#[test]
fn invalid_parameters_exit_two() {
    let res = qarith(&["synth", "comparator", "--n", "0"]);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("needs n >= 1"));

    let res = qarith(&["sweep", "no-such-thing", "--sizes", "16,32,64"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn verify_passes_and_mutation_hook_fails() {
    let res = qarith(&["verify", "cq-adder", "--n", "4", "--constant", "11"]);
    assert_eq!(res.status.code(), Some(0));

    let res = qarith(&[
        "verify",
        "cq-adder",
        "--n",
        "4",
        "--constant",
        "11",
        "--inject-mutation",
    ]);
    assert_eq!(res.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("\"fail\""));
}

#[test]
fn verify_modular_adder_on_valid_inputs() {
    let res = qarith(&[
        "verify",
        "modular-adder",
        "--n",
        "4",
        "--modulus",
        "13",
        "--constant",
        "9",
    ]);
    assert_eq!(res.status.code(), Some(0));
}

#[test]
fn hex_and_binary_literals_are_accepted() {
    let a = qarith(&["verify", "cq-adder", "--n", "4", "--constant", "0xB"]);
    let b = qarith(&["verify", "cq-adder", "--n", "4", "--constant", "0b1011"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
}

#[test]
fn identical_requests_are_byte_identical() {
    let out1 = tmp("det1.qasm");
    let out2 = tmp("det2.qasm");
    for out in [&out1, &out2] {
        let res = qarith(&[
            "synth",
            "cq-adder",
            "--n",
            "12",
            "--constant",
            "1234",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(res.status.success());
    }
    assert_eq!(
        std::fs::read(&out1).unwrap(),
        std::fs::read(&out2).unwrap()
    );
}

#[test]
fn export_round_trips() {
    let out = tmp("exp.qasm");
    let back = tmp("exp2.qasm");
    qarith(&[
        "synth",
        "mcx",
        "--k",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    let res = qarith(&[
        "export",
        out.to_str().unwrap(),
        "--out",
        back.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    assert_eq!(
        std::fs::read(&out).unwrap(),
        std::fs::read(&back).unwrap()
    );
}

#[test]
fn sweep_emits_json_with_points() {
    let res = qarith(&[
        "sweep",
        "comparator",
        "--sizes",
        "8,12,16",
        "--calibration",
        "2",
    ]);
    let stdout = String::from_utf8_lossy(&res.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 3);
}

#[test]
fn shor_estimate_reports_qubit_formula() {
    let res = qarith(&["shor-estimate", "--n", "16"]);
    assert!(res.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&res.stdout)).unwrap();
    assert_eq!(v["total_qubits"], 34);
}
