use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn itlp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_itlp")).args(args).output().expect("running itlp")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn gen(dir: &Path, n: &str, p: &str, seed: &str) -> String {
    let path = dir.join(format!("i{n}_{p}_{seed}.txt"));
    let path = path.to_str().unwrap().to_string();
    let o = itlp(&["gen", "--n", n, "--p", p, "--seed", seed, "--out", &path]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    path
}

#[test]
fn gen_is_deterministic() {
    let a = stdout(&itlp(&["gen", "--n", "4", "--p", "3", "--seed", "7"]));
    let b = stdout(&itlp(&["gen", "--n", "4", "--p", "3", "--seed", "7"]));
    assert_eq!(a, b);
    assert!(a.starts_with("format itlp-instance 1"));
}

#[test]
fn solve_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "6", "4", "2");
    let sol = dir.path().join("s.txt");
    let o = itlp(&["solve", &inst, "--l", "2", "--out", sol.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("6C4L2TL"), "{out}");
    assert!(out.contains("optimal"));
    let v = itlp(&["verify", &inst, sol.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));
    assert!(stdout(&v).contains("verification passed"));
}

#[test]
fn tampered_solution_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "5", "3", "4");
    let sol = dir.path().join("s.txt");
    itlp(&["solve", &inst, "--l", "1", "--out", sol.to_str().unwrap()]);
    let text = fs::read_to_string(&sol).unwrap();
    let line = text.lines().find(|l| l.starts_with("w_") || l.starts_with("x_")).unwrap().to_string();
    let (name, _) = line.split_once(' ').unwrap();
    let tampered = text.replace(&line, &format!("{name} 1.0e6"));
    fs::write(&sol, tampered).unwrap();
    let v = itlp(&["verify", &inst, sol.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(6), "{}", stdout(&v));
    assert!(stdout(&v).contains("VIOLATED"));
}

#[test]
fn structural_infeasibility_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "3", "3", "1");
    let o = itlp(&["solve", &inst, "--l", "4"]);
    assert_eq!(o.status.code(), Some(4));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("at most"), "{err}");
}

#[test]
fn contradictory_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "3", "3", "1");
    for args in [
        vec!["solve", inst.as_str(), "--variant", "min-links", "--q", "2", "--l", "1"],
        vec!["solve", inst.as_str(), "--variant", "handling", "--l", "1"],
        vec!["solve", inst.as_str(), "--t-seed", "3", "--l", "1"],
        vec!["solve", inst.as_str()],
    ] {
        let o = itlp(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
    assert_eq!(itlp(&["solve"]).status.code(), Some(2));
}

#[test]
fn missing_file_is_an_error() {
    let o = itlp(&["solve", "/nonexistent/instance.txt", "--l", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn engines_agree_on_small_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "4", "3", "9");
    let cost = |engine: &str| {
        let o = itlp(&["solve", &inst, "--variant", "pl", "--q", "3", "--l", "2", "--engine", engine]);
        let out = stdout(&o);
        let row = out.lines().nth(1).unwrap().to_string();
        row.split_whitespace().nth(1).unwrap().to_string()
    };
    let exact = cost("exact");
    assert_eq!(exact, cost("oracle"));
    assert_eq!(exact, cost("heuristic"));
}

#[test]
fn bench_writes_csv_and_stars_limits() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("b.csv");
    let o = itlp(&[
        "bench", "--n", "12", "--p", "8", "--l", "1,3,30", "--seeds", "1", "--node-limit", "1", "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("Cost (x10^7)"));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4, "{text}");
    assert!(lines[0].starts_with("name,seed,variant"));
    assert!(lines[3].contains("infeasible"), "{text}");
    for row in out.lines().skip(1) {
        if row.contains("time_limit") || row.contains(" feasible") {
            assert!(row.contains('*'), "{row}");
        }
    }
}

#[test]
fn info_prints_literal_counts() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "3", "2", "1");
    let o = itlp(&["info", &inst, "--l", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("literal model: 60 constraints, 49 variables"), "{out}");
    assert!(out.contains("= 60 constraints"));
}

#[test]
fn export_lp_writes_sections() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "3", "3", "1");
    let lp = dir.path().join("m.lp");
    let o = itlp(&["export-lp", &inst, "--l", "2", "--scheme", "literal", "--out", lp.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&lp).unwrap();
    for section in ["Minimize", "Subject To", "Bounds", "Binaries", "End"] {
        assert!(text.contains(section), "missing {section}");
    }
}
