use std::path::Path;
use std::process::{Command, Output};

use nullrank::bench::{build_control_case, build_zero_case, CSV_HEADER};
use nullrank::system::write_system_file;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nullrank")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_zero_case_is_null() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("zero.dss");
    write_system_file(&build_zero_case(3, 0), &file).unwrap();
    let out = run(&["check", path_str(&file)]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    for (k, line) in lines.iter().enumerate() {
        assert!(line.starts_with(&format!("method={} isnull=1 evidence=", k + 1)), "{line}");
        let elapsed = line.rsplit_once("elapsed=").unwrap().1;
        assert!(elapsed.parse::<f64>().unwrap() >= 0.0);
    }
}

#[test]
fn check_control_case_is_nonnull() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("control.dss");
    write_system_file(&build_control_case(3, 0), &file).unwrap();
    let out = run(&["check", path_str(&file), "--method", "4", "--method", "2", "--samples", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("method=2 isnull=0 evidence=gain:"), "{}", lines[0]);
    assert!(lines[1].starts_with("method=4 isnull=0 evidence=rank:2,samples:3"), "{}", lines[1]);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.dss");
    assert_eq!(run(&["check", path_str(&missing)]).status.code(), Some(2));

    let garbage = dir.path().join("garbage.dss");
    std::fs::write(&garbage, "not a system\n").unwrap();
    assert_eq!(run(&["check", path_str(&garbage)]).status.code(), Some(2));
    assert_eq!(run(&["rank", path_str(&garbage)]).status.code(), Some(2));

    let file = dir.path().join("zero.dss");
    write_system_file(&build_zero_case(1, 0), &file).unwrap();
    assert_eq!(run(&["check", path_str(&file), "--method", "6"]).status.code(), Some(2));
    assert_eq!(run(&["check", path_str(&file), "--tol", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["check", path_str(&file), "--samples", "0"]).status.code(), Some(2));
    assert_eq!(run(&["bench", "--orders", ""]).status.code(), Some(2));
}

#[test]
fn rank_prints_integer() {
    let dir = tempfile::tempdir().unwrap();
    let zero = dir.path().join("zero.dss");
    write_system_file(&build_zero_case(2, 4), &zero).unwrap();
    let out = run(&["rank", path_str(&zero), "--samples", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "0");

    let control = dir.path().join("control.dss");
    write_system_file(&build_control_case(2, 4), &control).unwrap();
    assert_eq!(stdout(&run(&["rank", path_str(&control)])).trim(), "2");
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("bench.csv");
    let out = run(&["bench", "--orders", "2,1", "--seeds", "2", "--seed", "5", "--format", "csv", "--out", path_str(&out_file)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());
    let csv = std::fs::read_to_string(&out_file).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 5);
    let first: Vec<_> = lines[1].split(',').collect();
    assert_eq!((first[0], first[2]), ("1", "5"));
}

#[test]
fn bench_text_lists_orders() {
    let out = run(&["bench", "--orders", "1,3", "--seeds", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("total elapsed (s)"));
    assert!(text.lines().any(|l| l.split_whitespace().next() == Some("3")));
}
