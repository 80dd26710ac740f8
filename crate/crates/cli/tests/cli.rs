use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_llfisher")).args(args).output().expect("binary runs")
}

fn run_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_llfisher"))
        .args(args)
        .env("LLFISHER_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    let mut rows = vec![header];
    rows.extend(r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()));
    rows
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = rows[0].iter().position(|h| h == name).unwrap();
    rows[1..].iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn solve_smoke() {
    let v = json(&run(&["solve", "--bc", "periodic", "-N", "2", "--ground", "-c", "1", "-L", "1"]));
    for key in ["k", "dk_dc", "energy", "momentum", "norm", "provenance"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!(v["norm"]["norm_sq"].as_f64().unwrap() > 0.0);
    assert_eq!(v["k"].as_array().unwrap().len(), 2);
}

#[test]
fn single_boxed_particle() {
    let v = json(&run(&["solve", "--bc", "hardwall", "-N", "1", "-I", "1", "-c", "5", "-L", "2"]));
    assert_eq!(v["k"][0].as_f64().unwrap(), std::f64::consts::FRAC_PI_2);
}

#[test]
fn validation_errors_exit_two() {
    for args in [
        vec!["solve", "--bc", "periodic", "-I", "1,1", "-c", "1", "-L", "1"],
        vec!["solve", "--bc", "periodic", "-N", "2", "--ground", "-c", "1", "-L", "-1"],
        vec!["solve", "--bc", "ring-ish", "-N", "2", "--ground", "-c", "1", "-L", "1"],
        vec!["solve", "--bc", "periodic", "-N", "2", "--ground", "-c", "1", "-L", "1", "--format", "csv"],
        vec!["fisher", "--bc", "periodic", "-N", "2", "--ground", "-c", "0.2", "--axis", "L", "--grid", ""],
        vec![
            "fisher", "--bc", "periodic", "-N", "2", "--ground", "-c", "0.2", "-L", "3", "--axis", "L", "--grid", "1,2",
        ],
        vec!["fisher", "--bc", "periodic", "-N", "2", "--ground", "-L", "3", "--axis", "c", "--grid", "2,1"],
        vec!["imaging", "--bc", "periodic", "-N", "2", "--ground", "-c", "0.2", "-L", "10", "--pixels", "0"],
        vec!["solve", "--bc", "periodic", "-N", "2", "--ground", "--type1", "1", "-c", "1", "-L", "1"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(
        run_env(&["solve", "--bc", "periodic", "-N", "1", "--ground", "-c", "1", "-L", "1"], "zero").status.code(),
        Some(2)
    );
}

#[test]
fn length_sweep_peaks_near_optimum() {
    let rows = csv_rows(&run(&[
        "fisher",
        "--bc",
        "periodic",
        "-N",
        "2",
        "--ground",
        "-c",
        "0.2",
        "--axis",
        "L",
        "--grid",
        "lin:48:58:41",
    ]));
    let l = column(&rows, "value");
    let f = column(&rows, "cfi");
    let best = (0..f.len()).fold(0, |b, i| if f[i] > f[b] { i } else { b });
    assert!((l[best] - 52.75).abs() < 0.5, "peak at {}", l[best]);
    assert!(rows[1..].iter().all(|r| r[rows[0].iter().position(|h| h == "status").unwrap()] == "ok"));
}

#[test]
fn excited_state_family_in_one_run() {
    let mut args = vec!["fisher", "--bc", "hardwall", "-c", "0.2", "-L", "60"];
    for list in ["1,2,3", "1,2,4", "1,2,5", "1,2,6", "1,3,4", "2,3,4"] {
        args.extend(["-I", list]);
    }
    let rows = csv_rows(&run(&args));
    assert_eq!(rows.len(), 7);
    let states: Vec<&str> = rows[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(states[0], "hardwall[1,2,3]");
    let f = column(&rows, "qfi");
    assert!(f.iter().all(|v| *v > 0.0));
}

#[test]
fn lmax_records() {
    let v = json(&run(&["lmax", "--bc", "periodic", "-N", "2", "--ground", "-c", "0.2"]));
    assert!((v["l_max"].as_f64().unwrap() - 52.75).abs() < 0.5);
    assert!((v["c_l_max"].as_f64().unwrap() - 10.55).abs() < 0.1);
    let h = json(&run(&["lmax", "--bc", "hardwall", "-N", "2", "--ground", "-c", "0.2"]));
    assert!((h["l_max"].as_f64().unwrap() - 57.0).abs() < 0.5);
    let out = run(&["lmax", "--bc", "periodic", "-N", "2", "--ground", "-c", "0.2", "--bracket", "100,200"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn imaging_ratios_increase() {
    for bc in ["periodic", "hardwall"] {
        let rows = csv_rows(&run(&[
            "imaging",
            "--bc",
            bc,
            "-N",
            "2",
            "--ground",
            "-c",
            "0.2",
            "-L",
            "10",
            "--pixels",
            "2,4,8,16,32",
        ]));
        let r = column(&rows, "ratio");
        assert!(r.windows(2).all(|w| w[1] > w[0]), "{bc}: {r:?}");
        assert!(r[4] > 0.98 && r[4] <= 1.0);
    }
}

#[test]
fn sampling_writes_shots_and_mle() {
    let dir = tempfile::tempdir().unwrap();
    let shots = dir.path().join("shots.csv");
    let mle = dir.path().join("mle.json");
    let args = |s: &Path, m: &Path| {
        vec![
            "imaging".to_string(),
            "--bc".into(),
            "periodic".into(),
            "-N".into(),
            "2".into(),
            "--ground".into(),
            "-c".into(),
            "0.2".into(),
            "-L".into(),
            "10".into(),
            "--pixels".into(),
            "8".into(),
            "--sample".into(),
            "2000".into(),
            "--seed".into(),
            "9".into(),
            "--shots-out".into(),
            s.display().to_string(),
            "--mle-out".into(),
            m.display().to_string(),
        ]
    };
    let a = args(&shots, &mle);
    let out = run(&a.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&shots).unwrap();
    assert_eq!(text.lines().count(), 2001);
    assert!(text.starts_with("shot,bin0,"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&mle).unwrap()).unwrap();
    let c_hat = v["c_hat"].as_f64().unwrap();
    let sigma = v["crb_sigma"].as_f64().unwrap();
    assert!((c_hat - 0.2).abs() < 5.0 * sigma, "{c_hat} vs sigma {sigma}");

    let shots2 = dir.path().join("shots2.csv");
    let mle2 = dir.path().join("mle2.json");
    let b = args(&shots2, &mle2);
    assert!(run(&b.iter().map(String::as_str).collect::<Vec<_>>()).status.success());
    assert_eq!(std::fs::read(&shots).unwrap(), std::fs::read(&shots2).unwrap());
    assert_eq!(std::fs::read(&mle).unwrap(), std::fs::read(&mle2).unwrap());
}

#[test]
fn output_is_byte_identical_across_thread_counts() {
    let args = ["fisher", "--bc", "periodic", "-I", "-1,0,2", "-c", "0.5", "--axis", "L", "--grid", "log:1:20:6"];
    let one = run_env(&args, "1");
    let four = run_env(&args, "4");
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let mut with_file: Vec<&str> = args.to_vec();
    let p = path.display().to_string();
    with_file.extend(["--format", "json", "--output", &p]);
    assert!(run(&with_file).status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 6);
    assert_eq!(v[0]["report"]["phase_class"], "general");
}

#[test]
fn failed_points_are_flagged() {
    // the ring ground state is degenerate at c = 0; the other points still succeed
    let out = run(&["fisher", "--bc", "periodic", "-N", "2", "--ground", "-L", "1", "--axis", "c", "--grid", "0,1,2"]);
    let rows = csv_rows(&out);
    let status = rows[0].iter().position(|h| h == "status").unwrap();
    assert_eq!(rows[1][status], "failed");
    assert_eq!(rows[2][status], "ok");
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let all = run(&["fisher", "--bc", "periodic", "-N", "2", "--ground", "-L", "1", "--axis", "c", "--grid", "0"]);
    assert_eq!(all.status.code(), Some(3));
}
