use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_randes");

fn randes(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("RANDES_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn config(name: &str) -> String {
    format!("{}/configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// `y = x1 + x2` exactly, with deterministic non-collinear covariates.
fn write_noiseless(path: &Path, n: usize, p: usize) {
    let mut s = String::from("y");
    for j in 1..=p {
        s += &format!(",x{j}");
    }
    s.push('\n');
    for i in 0..n {
        let x: Vec<f64> = (0..p).map(|j| ((i * (j + 2) + j * j) as f64 * 0.7 + j as f64).sin()).collect();
        s += &format!("{}", x[0] + x[1]);
        for v in &x {
            s += &format!(",{v}");
        }
        s.push('\n');
    }
    fs::write(path, s).unwrap();
}

#[test]
fn simulate_csv_layout_and_determinism() {
    let args = ["simulate", "--config", &config("experiment1_n15.cfg"), "--seed", "3", "--reps", "4"];
    let a = randes(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let text = stdout(&a);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# seed=3 generator="));
    assert_eq!(lines.next().unwrap(), "estimator,n,metric,value,ci_half_width,reps,seed");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 5 * 3);
    for r in &rows {
        assert_eq!(r.len(), 7);
        assert_eq!((r[1], r[5], r[6]), ("15", "4", "3"));
        let v: f64 = r[3].parse().unwrap();
        if r[2] != "risk_ratio" {
            assert!((0.0..=1.0).contains(&v), "{r:?}");
        } else {
            assert!(v >= 0.0);
        }
    }
    let estimators: Vec<&str> = rows.iter().step_by(3).map(|r| r[0]).collect();
    assert_eq!(estimators, ["K=1.1", "K=1.5", "K=2", "lasso", "adaptive-lasso"]);

    let b = randes(&args);
    assert_eq!(a.stdout, b.stdout);
    let c = randes(&[&args[..], &["--threads", "3"]].concat());
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn simulate_json_to_file_mirrors_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let cfg = config("experiment1_n20.cfg");
    let o = randes(&["simulate", "--config", &cfg, "--seed", "5", "--reps", "3", "--format", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["seed"], 5);

    let csv = stdout(&randes(&["simulate", "--config", &cfg, "--seed", "5", "--reps", "3"]));
    let first = csv.lines().nth(2).unwrap();
    let value: f64 = first.split(',').nth(3).unwrap().parse().unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 15);
    assert_eq!(rows[0]["value"].as_f64().unwrap(), value);
}

#[test]
fn unknown_config_key_names_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "p = 3\nn = 10\ncolour = red\n").unwrap();
    let o = randes(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("line 3") && err.contains("colour"), "{err}");
}

#[test]
fn zero_threads_rejected() {
    let o = randes(&["--threads", "0", "verify", "circulant-psd"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn select_recovers_noiseless_support() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    write_noiseless(&data, 25, 5);
    let audit = dir.path().join("audit.csv");
    let o = randes(&["select", "--data", data.to_str().unwrap(), "--dmax", "3", "--audit", audit.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("model: 1,2"));
    for j in [1, 2] {
        let line = out.lines().find(|l| l.starts_with(&format!("theta[{j}] = "))).unwrap();
        let v: f64 = line.split(" = ").nth(1).unwrap().parse().unwrap();
        assert!((v - 1.0).abs() < 1e-9, "{line}");
    }
    // 1 + 5 + 10 + 10 models of dimension at most 3
    let audit = fs::read_to_string(&audit).unwrap();
    assert_eq!(audit.lines().next(), Some("model,dim,criterion"));
    assert_eq!(audit.lines().count(), 1 + 26);
}

#[test]
fn select_warns_above_recommended_dmax() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    write_noiseless(&data, 12, 3);
    let path = data.to_str().unwrap();
    let quiet = randes(&["select", "--data", path, "--dmax", "2"]);
    assert_eq!(quiet.status.code(), Some(0));
    assert!(!stderr(&quiet).contains("warning"));
    let loud = randes(&["select", "--data", path, "--dmax", "3"]);
    assert_eq!(loud.status.code(), Some(0));
    assert!(stderr(&loud).contains("exceeds the recommended cap"));
    assert_eq!(stdout(&loud).lines().next(), Some("model: 1,2"));
}

#[test]
fn select_rejects_bad_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    assert_eq!(randes(&["select", "--data", empty.to_str().unwrap()]).status.code(), Some(1));

    let header = dir.path().join("header.csv");
    fs::write(&header, "y,a,b\n1,2,3\n").unwrap();
    assert_eq!(randes(&["select", "--data", header.to_str().unwrap()]).status.code(), Some(1));

    assert_eq!(randes(&["select", "--data", "/nonexistent/data.csv"]).status.code(), Some(1));
}

#[test]
fn verify_exit_codes() {
    assert_eq!(randes(&["verify", "bogus"]).status.code(), Some(1));
    let ok = randes(&["verify", "circulant-psd"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).lines().all(|l| !l.starts_with("FAIL")));
    // a decreasing grid cannot show the risk ratio shrinking with n
    let bad = randes(&["verify", "fpe-trend", "--n-grid", "400,50", "--reps", "20", "--seed", "1"]);
    assert_eq!(bad.status.code(), Some(2), "{}", stdout(&bad));
}
