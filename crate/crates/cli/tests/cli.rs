//! End-to-end checks of the `stokeslab` binary: exit codes, CSV shapes,
//! error wording, and byte-level determinism.

use std::process::{Command, Output};

fn stokeslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stokeslab"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn identities_pass_and_respect_the_cap() {
    let ok = stokeslab(&["identities", "--nmax", "4"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    let text = stdout(&ok);
    assert!(text.contains("standard identity max deviation"));
    assert!(text.contains("normalized identity max deviation"));

    let capped = stokeslab(&["identities", "--nmax", "11"]);
    assert_eq!(capped.status.code(), Some(1));
    assert!(stderr(&capped).contains("capped"));
}

#[test]
fn witness_csv_on_stdout_has_ten_rows() {
    let out = stokeslab(&["witness", "--state", "singlet(n=1)", "--nmax", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "id,lhs,rhs,margin,entangled");
    assert_eq!(lines.len(), 11);
    assert!(lines.iter().skip(1).all(|l| l.ends_with(",1")));
}

#[test]
fn parse_errors_name_the_offending_token_and_exit_1() {
    let out = stokeslab(&["witness", "--state", "bsv(gain=0.8)+fog(p=1)", "--nmax", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("fog"), "stderr: {}", stderr(&out));

    let out = stokeslab(&["witness", "--state", "bsv(gain=oops)", "--nmax", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("oops"), "stderr: {}", stderr(&out));
}

#[test]
fn unknown_flags_and_witness_names_are_usage_errors() {
    let out = stokeslab(&["witness", "--state", "singlet(n=1)", "--nmax", "2", "--wat"]);
    assert_eq!(out.status.code(), Some(1));

    let out = stokeslab(&[
        "sweep",
        "--state",
        "bsv(gain=0.5)",
        "--sweep",
        "p",
        "--grid",
        "0:1:0.5",
        "--nmax",
        "2",
        "--witness",
        "SIMON_TYPO",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("SIMON_TYPO"));
}

#[test]
fn help_exits_zero() {
    let out = stokeslab(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn sweep_csv_rows_and_summary_lines() {
    let out = stokeslab(&[
        "sweep",
        "--state",
        "bsv(gain=0.8)",
        "--sweep",
        "p",
        "--grid",
        "0:1:0.25",
        "--nmax",
        "8",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "param,id,lhs,rhs,margin,entangled");
    let data_rows = lines.iter().filter(|l| !l.starts_with('#') && !l.starts_with("param")).count();
    assert_eq!(data_rows, 5 * 10);
    assert!(lines.iter().any(|l| l.starts_with("# containment VAR_IMPROVED_STD covers VAR_STD: ok")));
    assert!(lines.iter().any(|l| l.starts_with("# first_detection SIMON_STD")));
}

#[test]
fn identical_invocations_give_byte_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    let args = |path: &std::path::Path| {
        let p = path.to_str().unwrap().to_owned();
        vec![
            "sample".to_owned(),
            "--state".into(),
            "bsv(gain=0.6)+noise(p=0.8)".into(),
            "--nmax".into(),
            "6".into(),
            "--shots".into(),
            "400".into(),
            "--seed".into(),
            "12".into(),
            "--resamples".into(),
            "50".into(),
            "--out".into(),
            p,
        ]
    };
    for path in [&first, &second] {
        let out = Command::new(env!("CARGO_BIN_EXE_stokeslab"))
            .args(args(path))
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    let a = std::fs::read(&first).unwrap();
    let b = std::fs::read(&second).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn sample_writes_records_file_and_rejects_starved_runs() {
    let dir = tempfile::tempdir().unwrap();
    let est = dir.path().join("est.csv");
    let recs = dir.path().join("recs.csv");
    let out = stokeslab(&[
        "sample",
        "--state",
        "singlet(n=1)",
        "--nmax",
        "1",
        "--shots",
        "60",
        "--seed",
        "5",
        "--resamples",
        "30",
        "--out",
        est.to_str().unwrap(),
        "--records",
        recs.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let est_text = std::fs::read_to_string(&est).unwrap();
    assert!(est_text.starts_with("id,lhs_hat,rhs_hat,margin_hat,stderr,shots"));
    assert_eq!(est_text.lines().count(), 11);
    let rec_text = std::fs::read_to_string(&recs).unwrap();
    assert_eq!(rec_text.lines().count(), 1 + 180);
    assert!(rec_text.starts_with("basis,n_a_i,n_a_iperp,n_b_i,n_b_iperp"));

    let starved = stokeslab(&[
        "sample", "--state", "singlet(n=1)", "--nmax", "1", "--shots", "10", "--seed", "5",
    ]);
    assert_eq!(starved.status.code(), Some(1));
    assert!(stderr(&starved).contains("shots"));
}

#[test]
fn truncation_tail_warning_reaches_stderr() {
    let out = stokeslab(&["witness", "--state", "bsv(gain=1.2)", "--nmax", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("warning"), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("--nmax"));

    let quiet = stokeslab(&["witness", "--state", "bsv(gain=0.3)", "--nmax", "8"]);
    assert_eq!(quiet.status.code(), Some(0));
    assert!(!stderr(&quiet).contains("warning"));
}
