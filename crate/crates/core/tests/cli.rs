use std::path::Path;
use std::process::{Command, Output};

use boole_bell::SignSequence;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boole-bell")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn witness_at_right_angle() {
    let out = run(&["witness", "--a", "[1,0,0]", "--b", "[0,1,0]"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("case=right"), "{text}");
    assert!(text.contains("lhs=1.414214"), "{text}");
}

#[test]
fn witness_from_angle_and_optimum() {
    let out = run(&["witness", "--theta", "60", "--optimal"]);
    let text = stdout(&out);
    assert!(text.contains("case=acute") && text.contains("lhs=1.366025"), "{text}");
    assert!(text.contains("1.500000"), "{text}");
}

#[test]
fn bruteforce_example() {
    let out = run(&["bruteforce", "--n", "8"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("max_lhs=1.000000"));
}

#[test]
fn bruteforce_rejects_large_lengths() {
    let out = run(&["bruteforce", "--n", "13"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr(&out).lines().count(), 1);
}

#[test]
fn check_boole_example() {
    let out = run(&["check-boole", "--f", "+--+", "--g", "++++", "--h", "----"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("lhs=") && text.contains("PASS"), "{text}");
}

#[test]
fn unicode_minus_is_accepted() {
    let ascii = run(&["correlate", "--f", "+-+-", "--g", "++--"]);
    let unicode = run(&["correlate", "--f", "+−+−", "--g", "++−−"]);
    assert_eq!(ascii.stdout, unicode.stdout);
    assert!(stdout(&ascii).contains("correlation=0.000000"));
}

#[test]
fn usage_errors_exit_two_with_one_line() {
    for args in [
        &["witness", "--bogus"][..],
        &["frobnicate"][..],
        &["correlate", "--f", "++x", "--g", "+++"][..],
        &["correlate", "--f", "++", "--g", "+++"][..],
        &["witness", "--a", "[1,0,0]", "--b", "[2,0,0]"][..],
        &["witness", "--a", "[0,0,0]", "--b", "[1,0,0]"][..],
        &[][..],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(stderr(&out).trim_end().lines().count(), 1, "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let v = run(&["--version"]);
    assert_eq!(v.status.code(), Some(0));
    assert!(stdout(&v).contains(boole_bell::VERSION));
}

#[test]
fn verdict_failures_exit_one() {
    let out = run(&["--n", "2000", "certify-ap", "--source", "independent", "--count", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["--n", "2000", "certify-ap", "--source", "prepared", "--count", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["--n", "20000", "experiment", "--theta", "90", "--count", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn tables_begin_with_a_header() {
    let cases: [(&[&str], &str); 5] = [
        (&["--format", "csv", "correlate", "--f", "++", "--g", "+-"], "n,sum,correlation"),
        (&["--n", "200", "simulate-prepared", "--count", "3"], "direction_alpha,direction_beta,n,correlation,stderr"),
        (&["--n", "200", "simulate-singlet", "--theta", "0,45"], "direction_alpha,direction_beta,n,correlation,stderr"),
        (&["--n", "200", "lhv", "--theta", "30"], "direction_alpha,direction_beta,n,correlation,stderr"),
        (&["--n", "200", "certify-ap", "--count", "2"], "certificate,axis,alpha,target"),
    ];
    for (args, header) in cases {
        let text = stdout(&run(args));
        assert!(text.lines().next().unwrap().starts_with(header), "{args:?}: {text}");
    }
}

#[test]
fn json_summaries_carry_seed_version_and_hash() {
    for args in [
        &["--format", "json", "--seed", "77", "bruteforce", "--n", "3"][..],
        &["--format", "json", "--seed", "77", "--n", "500", "experiment", "--count", "2"][..],
        &["--format", "json", "--seed", "77", "witness", "--theta", "30"][..],
    ] {
        let v: serde_json::Value = serde_json::from_str(&stdout(&run(args))).unwrap();
        assert_eq!(v["seed"], 77, "{args:?}");
        assert_eq!(v["version"], boole_bell::VERSION);
        assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    }
}

fn read_dump(dir: &Path, name: &str) -> SignSequence {
    let text = dir.join(format!("{name}.txt"));
    if text.exists() {
        SignSequence::parse_text(std::fs::read_to_string(text).unwrap().trim_end()).unwrap()
    } else {
        SignSequence::from_bytes(&std::fs::read(dir.join(format!("{name}.bin"))).unwrap()).unwrap()
    }
}

#[test]
fn dumps_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    for format in ["text", "binary"] {
        let dir = tmp.path().join(format);
        let d = dir.to_str().unwrap();
        let u = "+-+--++-+++--+-";
        let out = run(&["--seed", "4", "simulate-prepared", "--u", u, "--count", "3", "--dump", d, "--dump-format", format]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        assert_eq!(read_dump(&dir, "u"), u.parse().unwrap());
        assert_eq!(read_dump(&dir, "x_000"), u.parse().unwrap());
        assert_eq!(read_dump(&dir, "x_002").len(), u.len());
    }
    let text = stdout(&run(&["correlate", "--f", &read_dump(&tmp.path().join("text"), "x_001").to_text(), "--g", "+-+--++-+++--+-"]));
    assert!(text.contains("n=15"));
}

#[test]
fn plots_are_two_column_series() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().to_str().unwrap();
    assert_eq!(run(&["witness", "--sweep", "--plot-dir", d]).status.code(), Some(0));
    for series in ["constructive_witness", "optimal_witness"] {
        let text = std::fs::read_to_string(tmp.path().join(format!("{series}.dat"))).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with('#'));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 179);
        assert!(rows.iter().all(|r| r.split_whitespace().count() == 2));
    }
}

#[test]
fn out_flag_writes_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bf.txt");
    let out = run(&["--out", path.to_str().unwrap(), "bruteforce", "--n", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(path).unwrap().contains("max_lhs=1.000000"));
}

#[test]
fn config_file_drives_the_experiment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"seed": 12, "n": 1000, "directions": [[1,0,0],[0,1,0]], "scenario": "hypothesis-2"}"#).unwrap();
    let out = run(&["--format", "json", "--config", cfg.to_str().unwrap(), "experiment"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["seed"], 12);
    assert_eq!(v["config"]["experiment"]["scenario"], "hypothesis-2");
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"seed": 1, "n": 5, "directions": [[1,0,0]]}"#).unwrap();
    assert_eq!(run(&["--config", bad.to_str().unwrap(), "experiment"]).status.code(), Some(2));
}
