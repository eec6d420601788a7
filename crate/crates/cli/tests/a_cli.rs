use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use oracle_opt::metric::gen_cycle;
use oracle_opt::relax::cycle_fractional_solution;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oracle-opt")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_then_greedy_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let inst = path(&dir, "c6.txt");
    ok(&["gen", "cycle", "--n", "6", "--out", s(&inst)]);
    assert!(fs::read_to_string(&inst).unwrap().starts_with("6\n0 1 2 3 2 1\n"));
    let a = path(&dir, "a.txt");
    let first = ok(&["optimize", "tz2-greedy", "--instance", s(&inst), "--out", s(&a)]);
    let set_first = fs::read(&a).unwrap();
    let second = ok(&["optimize", "tz2-greedy", "--instance", s(&inst), "--out", s(&a)]);
    assert_eq!(first, second);
    assert_eq!(set_first, fs::read(&a).unwrap());
    let cost: u64 = first.lines().nth(1).unwrap().split(',').nth(4).unwrap().parse().unwrap();
    assert!(cost > 0);
}

#[test]
fn eval_pr_uniform3_reports_worst_pair() {
    let dir = TempDir::new().unwrap();
    let inst = path(&dir, "u3.txt");
    let set = path(&dir, "a.txt");
    ok(&["gen", "uniform", "--n", "3", "--out", s(&inst)]);
    fs::write(&set, "1\n").unwrap();
    let out = ok(&["eval", "pr", "--instance", s(&inst), "--set-file", s(&set)]);
    assert!(out.contains("summary,worst_check,2 <= 2*1+1"), "{out}");
    assert!(out.contains("summary,violations,0"));
    assert!(out.contains("summary,max_ratio,2.000000"));
}

#[test]
fn gap_certificate_column_matches_library() {
    let out = ok(&["gap", "--family", "cycle", "--k", "3", "--n-list", "16,64,256"]);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    for (row, n) in rows.iter().zip([16usize, 64, 256]) {
        let cols: Vec<&str> = row.split(',').collect();
        let want = cycle_fractional_solution(n, 3).evaluate(&gen_cycle(n).unwrap());
        assert_eq!(cols[0], n.to_string());
        assert_eq!(cols[3], format!("{:.6}", want.objective));
        assert_eq!(cols[4], "0.000000");
    }
}

#[test]
fn trials_and_report_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let inst = path(&dir, "r.txt");
    ok(&["gen", "random", "--n", "8", "--seed", "5", "--out", s(&inst)]);
    let mut logs = Vec::new();
    for (algo, extra) in [("pr-lp", "0"), ("pr-baseline", "0"), ("tz2o", "2"), ("tz2o-topf", "2"), ("pro", "2")] {
        let a = path(&dir, &format!("{algo}-a.csv"));
        let b = path(&dir, &format!("{algo}-b.csv"));
        for p in [&a, &b] {
            ok(&["trials", "--algo", algo, "--instance", s(&inst), "--trials", "12", "--seed", "9", "--outliers", extra, "--out", s(p)]);
        }
        let text = fs::read_to_string(&a).unwrap();
        assert_eq!(text, fs::read_to_string(&b).unwrap(), "{algo}");
        assert_eq!(text.lines().count(), 13);
        assert!(text.starts_with("trial,seed,a_size,f_size,cost,lp_or_sdp_objective,forced_empty_fallback\n"));
        logs.push(a);
    }
    let mut args = vec!["report"];
    args.extend(logs.iter().map(|p| s(p)));
    let r1 = ok(&args);
    assert_eq!(r1, ok(&args));
    assert_eq!(r1.lines().count(), 6);
}

#[test]
fn other_commands_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let inst = path(&dir, "r.txt");
    ok(&["gen", "random", "--n", "9", "--seed", "2", "--out", s(&inst)]);
    let cases: Vec<Vec<&str>> = vec![
        vec!["gen", "random", "--n", "9", "--seed", "2"],
        vec!["gen", "setcover", "--universe", "2", "--sets", "2", "--seed", "4"],
        vec!["optimize", "pr-lp", "--instance", s(&inst), "--seed", "3"],
        vec!["optimize", "tz2o-sdp", "--instance", s(&inst), "--outliers", "1", "--seed", "3"],
        vec!["optimize", "pr-o-sdp", "--instance", s(&inst), "--outliers", "1", "--seed", "3"],
        vec!["optimize", "brute", "--instance", s(&inst), "--k", "3"],
        vec!["optimize", "brute", "--instance", s(&inst), "--objective", "pr", "--outliers", "2"],
        vec!["eval", "tz", "--instance", s(&inst), "--k", "3", "--seed", "1"],
        vec!["eval", "pr", "--instance", s(&inst), "--queries", "sample", "--samples", "40", "--seed", "1"],
        vec!["gap", "--k", "2", "--n-list", "6,8"],
    ];
    for args in cases {
        assert_eq!(ok(&args), ok(&args), "{args:?}");
    }
}

#[test]
fn gen_random_matches_library_text() {
    let out = ok(&["gen", "random", "--n", "7", "--seed", "11", "--edge-prob", "0.5", "--max-weight", "4"]);
    let lib = oracle_opt::metric::gen_random_graph_metric(7, 0.5, 4, 11).unwrap();
    assert_eq!(out, lib.to_text());
}

#[test]
fn brute_chain_file_round_trips_into_eval() {
    let dir = TempDir::new().unwrap();
    let inst = path(&dir, "c8.txt");
    let chain = path(&dir, "chain.txt");
    ok(&["gen", "cycle", "--n", "8", "--out", s(&inst)]);
    let out = ok(&["optimize", "brute", "--instance", s(&inst), "--k", "3", "--out", s(&chain)]);
    assert!(out.lines().nth(1).unwrap().starts_with("brute,8,"));
    assert_eq!(fs::read_to_string(&chain).unwrap().lines().count(), 4);
    let rep = ok(&["eval", "tz", "--instance", s(&inst), "--chain-file", s(&chain)]);
    assert!(rep.contains("summary,oracle,tz3"));
    assert!(rep.contains("summary,violations,0"));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = path(&dir, "bad.txt");
    fs::write(&bad, "2\n0 1\n2 0\n").unwrap();
    assert_eq!(code(&["optimize", "tz2-greedy", "--instance", s(&bad)]), 2);
    assert_eq!(code(&["optimize", "tz2-greedy", "--bogus"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["gen", "cycle"]), 2);

    let big = path(&dir, "big.txt");
    ok(&["gen", "cycle", "--n", "13", "--out", s(&big)]);
    assert_eq!(code(&["optimize", "brute", "--instance", s(&big), "--k", "3"]), 2);
    assert_eq!(code(&["optimize", "pr-lp", "--instance", s(&big), "--epsilon", "0"]), 2);
    assert_eq!(code(&["optimize", "tz2o-sdp", "--instance", s(&big), "--outliers", "14"]), 2);

    let empty_level = path(&dir, "chain.txt");
    fs::write(&empty_level, "1 2 3 4 5 6 7 8 9 10 11 12 13\n\n").unwrap();
    assert_eq!(code(&["eval", "tz", "--instance", s(&big), "--chain-file", s(&empty_level)]), 0);
    fs::write(&empty_level, "1 2 3 4 5 6 7 8 9 10 11 12 13\n\n\n").unwrap();
    assert_eq!(code(&["eval", "tz", "--instance", s(&big), "--chain-file", s(&empty_level)]), 2);

    let small = path(&dir, "small.txt");
    ok(&["gen", "uniform", "--n", "6", "--out", s(&small)]);
    assert_eq!(code(&["optimize", "tz2o-sdp", "--instance", s(&small), "--outliers", "2", "--sdp-iters", "1"]), 3);
    assert_eq!(
        code(&["trials", "--algo", "pro", "--instance", s(&small), "--trials", "2", "--seed", "0", "--sdp-iters", "1"]),
        3
    );
}
