use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sqfn(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqfn"))
        .args(args)
        .current_dir(cwd)
        .env_remove("SQFN_LOG")
        .output()
        .unwrap()
}

fn last_stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.lines().last().unwrap()).unwrap()
}

fn write_line_function(path: &Path, f: impl Fn(f64) -> f64) {
    let mut s = String::from("# 1,0.05,-2,81\n");
    for k in 0..81 {
        s.push_str(&format!("{:e}\n", f(-2.0 + 0.05 * k as f64)));
    }
    fs::write(path, s).unwrap();
}

#[test]
fn no_arguments_prints_usage_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = sqfn(&[], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &[
            "compute", "--input", "f.csv", "--alpha", "1.5", "--out", "o",
        ][..],
        &["compute", "--input", "f.csv", "--alpha", "0", "--out", "o"],
        &["compute", "--out", "o"],
        &["compute", "--input", "f.csv", "--out", "o", "--frobnicate"],
        &[
            "verify",
            "thm",
            "--id",
            "T9",
            "--scenario",
            "s",
            "--out",
            "o",
        ],
    ] {
        let out = sqfn(args, dir.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert_eq!(last_stderr_json(&out)["error"], "usage", "{args:?}");
    }
    assert!(!dir.path().join("o").exists());
}

#[test]
fn missing_files_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = sqfn(
        &["compute", "--input", "nope.csv", "--out", "o"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let err = last_stderr_json(&out);
    assert_eq!(err["error"], "io");
    assert_eq!(err["exit"], 2);
}

#[test]
fn compute_on_zero_function_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    write_line_function(&dir.path().join("f.csv"), |_| 0.0);
    let out = sqfn(
        &[
            "compute", "--input", "f.csv", "--alpha", "1.0", "--out", "out/",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(dir.path().join("out/sqfn.csv")).unwrap();
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(v.abs() <= 1e-8);
        rows += 1;
    }
    assert_eq!(rows, 81);
    assert!(dir.path().join("out/sqfn.svg").exists());
}

#[test]
fn compute_field_file_feeds_norm() {
    let dir = tempfile::tempdir().unwrap();
    write_line_function(&dir.path().join("f.csv"), |x| (1.0 - x * x).max(0.0));
    let out = sqfn(
        &[
            "--jobs",
            "2",
            "compute",
            "--input",
            "f.csv",
            "--out",
            "o",
            "--class-res",
            "4",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let out = sqfn(
        &[
            "norm",
            "--input",
            "o/sqfn.grid.csv",
            "--kind",
            "morrey",
            "--p",
            "2",
            "--out",
            "n",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let line: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(line["value"].as_f64().unwrap() > 0.0);
    let terms = fs::read_to_string(dir.path().join("n/norm_terms.csv")).unwrap();
    assert!(terms.starts_with("ball_index,center,radius,term\n"));
}

#[test]
fn weights_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = sqfn(&["weights", "--power", "0", "--h", "0.1"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "ball_index,center,radius,ap_term,a1_term,doubling_term"
    );
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[3], "1.0");
        assert_eq!(cols[4], "1.0");
    }
}

#[test]
fn generalized_theorem_refuses_fast_growth() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("s.txt"),
        "seed = 42\nh = 0.1\nphi = power:1.5\n",
    )
    .unwrap();
    let out = sqfn(
        &[
            "verify",
            "thm",
            "--id",
            "T3",
            "--scenario",
            "s.txt",
            "--out",
            "o",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let err = last_stderr_json(&out);
    assert_eq!(err["error"], "precondition");
    assert!(err["message"]
        .as_str()
        .unwrap()
        .contains("doubling constant"));
}

#[test]
fn verify_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.txt"), "seed = 42\nh = 0.1\n").unwrap();
    for (out_dir, jobs) in [("a", "1"), ("b", "3")] {
        let out = sqfn(
            &[
                "--jobs",
                jobs,
                "verify",
                "thm",
                "--id",
                "T1",
                "--scenario",
                "s.txt",
                "--out",
                out_dir,
            ],
            dir.path(),
        );
        assert_eq!(out.status.code(), Some(0));
    }
    for ext in ["csv", "json"] {
        let a = fs::read(dir.path().join(format!("a/T1.{ext}"))).unwrap();
        let b = fs::read(dir.path().join(format!("b/T1.{ext}"))).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b);
    }
}

#[test]
fn seed_flag_beats_scenario_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.txt"), "seed = 1\nh = 0.1\n").unwrap();
    let run = |extra: &[&str], out_dir: &str| {
        let mut args = extra.to_vec();
        args.extend([
            "verify",
            "thm",
            "--id",
            "C",
            "--scenario",
            "s.txt",
            "--out",
            out_dir,
        ]);
        assert!(sqfn(&args, dir.path()).status.success());
        fs::read_to_string(dir.path().join(out_dir).join("C.csv")).unwrap()
    };
    let file_seed = run(&[], "a");
    let flag_seed = run(&["--seed", "5"], "b");
    assert!(file_seed.contains("seed=1;"));
    assert!(flag_seed.contains("seed=5;"));
}

#[test]
fn report_covers_every_theorem() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("s.txt"),
        "seed = 3\nh = 0.1\nphi = power:1.5\n",
    )
    .unwrap();
    let out = sqfn(&["report", "--scenario", "s.txt", "--out", "o"], dir.path());
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("o/report.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 10);
    let t3 = rows.iter().find(|r| &r[0] == "T3").unwrap();
    assert_eq!(&t3[6], "refused");
}
