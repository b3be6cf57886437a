use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use kickback::experiment::{parse_csv, parse_jsonl};

fn kickback(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kickback"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn oea_run_writes_parseable_csv() {
    let out = kickback(&[
        "--algorithm",
        "oea",
        "--instance",
        "random-pair",
        "--trials",
        "6",
        "--seed",
        "4",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records = parse_csv(out.stdout.as_slice()).unwrap();
    assert_eq!(records.len(), 6);
    assert_eq!(
        records.iter().map(|r| r.trial).collect::<Vec<_>>(),
        (0..6).collect::<Vec<_>>()
    );
    assert!(records.iter().all(|r| r.wall_ms == 0.0 && r.u_uses > 0));
    let summary: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(summary["algorithm"], "oea");
}

#[test]
fn output_is_identical_across_invocations_and_workers() {
    let base = [
        "--algorithm",
        "pea_modified",
        "--instance",
        "phase",
        "--trials",
        "12",
        "--sweep",
        "0.1,0.02",
    ];
    let one = kickback(&[&base[..], &["--workers", "1"]].concat());
    let again = kickback(&[&base[..], &["--workers", "1"]].concat());
    let three = kickback(&[&base[..], &["--workers", "3"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, again.stdout);
    assert_eq!(one.stdout, three.stdout);
    assert_eq!(parse_csv(one.stdout.as_slice()).unwrap().len(), 24);
}

#[test]
fn config_file_with_matrix_files_and_jsonl_output() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "h.txt",
        "# diagonal Hamiltonian\n2\n0.5 0\n0 0\n0 0\n-0.25 0\n",
    );
    write(dir.path(), "psi.txt", "2\n0.6\n0.8\n");
    let config = write(
        dir.path(),
        "run.toml",
        "[experiment]\nalgorithm = \"eea\"\np = 0.1\nc = 0.8\nK = 2\ntrials = 3\nseed = 9\n\n\
         [instance]\nhamiltonian = \"h.txt\"\nstate = \"psi.txt\"\n\n\
         [tail]\nkind = \"bounded\"\nlambda_max = 1.0\nb = 0.5\n",
    );
    let records_path = dir.path().join("out.jsonl");
    let out = kickback(&[
        "--config",
        &config,
        "--format",
        "jsonl",
        "--out",
        records_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records = parse_jsonl(fs::read(&records_path).unwrap().as_slice()).unwrap();
    assert_eq!(records.len(), 3);
    let exact = 0.36 * 0.5 - 0.64 * 0.25;
    assert!(records.iter().all(|r| (r.exact_re - exact).abs() < 1e-12));
    assert!(records.iter().all(|r| r.m_evolutions > 0 && r.total_time > 0.0));
    // with --out the summary goes to stdout
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["points"].as_array().unwrap().len(), 1);
}

#[test]
fn flags_override_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "run.toml",
        "[experiment]\nalgorithm = \"aea\"\ntrials = 50\n",
    );
    let out = kickback(&["--config", &config, "--trials", "2", "--instance", "rotation"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(parse_csv(out.stdout.as_slice()).unwrap().len(), 2);
}

#[test]
fn malformed_config_reports_line_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "bad.toml",
        "[experiment]\nalgorithm = \"oea\"\ntrails = 3\n",
    );
    let out = kickback(&["--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn malformed_matrix_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "u.txt", "2\n1 0\n0 0\n0 0\nnot-a-number\n");
    write(dir.path(), "psi.txt", "2\n1\n0\n");
    let config = write(
        dir.path(),
        "run.toml",
        "[experiment]\nalgorithm = \"aea\"\n[instance]\nunitary = \"u.txt\"\nstate = \"psi.txt\"\n",
    );
    let out = kickback(&["--config", &config, "--trials", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("u.txt:5"));
}

#[test]
fn invalid_operands_exit_2() {
    for args in [
        vec!["--algorithm", "oea", "--p", "0"],
        vec!["--algorithm", "oea", "--c", "1.5"],
        vec!["--algorithm", "eea", "--instance", "identity"],
    ] {
        let out = kickback(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn infeasible_parameters_exit_3() {
    // a tail this heavy needs stage II times finer than 48 phase bits resolve
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "run.toml",
        "[experiment]\nalgorithm = \"eea\"\np = 0.001\ntrials = 1\n\
         [instance]\nbuiltin = \"random-hermitian\"\n\
         [tail]\nkind = \"polynomial\"\nbeta = 0.0\ncoefficient = 1000.0\nb = 1.0\n",
    );
    let out = kickback(&["--config", &config]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
