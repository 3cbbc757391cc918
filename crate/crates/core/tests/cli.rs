use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_interpoint"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: stdout={} stderr={}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn dist_writes_all_pair_sets_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "x.csv", "x\n0.5\n1.5\n4\n");
    write(dir.path(), "y.csv", "2\n3\n-1\n");
    let args = ["dist", "--distance", "l1", "--x", "x.csv", "--y", "y.csv"];
    let a = run(dir.path(), &args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let text = String::from_utf8(a.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("set,distance"));
    let rows: Vec<(String, f64)> = lines
        .map(|l| {
            let (s, d) = l.split_once(',').unwrap();
            (s.to_string(), d.parse().unwrap())
        })
        .collect();
    for (set, n) in [("xx", 3), ("yy", 3), ("xy", 9)] {
        let d: Vec<f64> = rows.iter().filter(|r| r.0 == set).map(|r| r.1).collect();
        assert_eq!(d.len(), n, "{set}");
        assert!(d.windows(2).all(|w| w[0] <= w[1]));
    }
    assert_eq!(run(dir.path(), &args).stdout, a.stdout);
}

#[test]
fn dist_split_writes_single_columns() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "x.csv", "1,2\n2,2\n3,5\n");
    let out = run(dir.path(), &["--out", "d.csv", "dist", "--distance", "l2", "--x", "x.csv", "--split"]);
    assert_eq!(out.status.code(), Some(0));
    let xx = std::fs::read_to_string(dir.path().join("d_xx.csv")).unwrap();
    assert_eq!(xx.lines().count(), 3);
}

#[test]
fn domain_rules_on_negative_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "x.csv", "1,-2\n2,3\n");
    let canberra = run(dir.path(), &["dist", "--distance", "canberra", "--x", "x.csv"]);
    assert_eq!(canberra.status.code(), Some(0));
    let entropic = run(dir.path(), &["dist", "--distance", "entropic", "--x", "x.csv"]);
    assert_eq!(entropic.status.code(), Some(2));
    assert!(!entropic.stderr.is_empty());
    let missing = run(dir.path(), &["dist", "--distance", "l2", "--x", "nope.csv"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "x.csv", "1\n2\n3\n");
    let b0 = run(dir.path(), &["test", "--distance", "l2", "--x", "x.csv", "--y", "x.csv", "--permutations", "0"]);
    assert_eq!(b0.status.code(), Some(1));
    assert_eq!(run(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["figures", "fig1", "--resolution", "32"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["volume", "--distance", "hamming", "--center", "1"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn regularity_reports() {
    let dir = tempfile::tempdir().unwrap();
    let entropic = json(&run(dir.path(), &["regularity", "--distance", "entropic"]));
    assert_eq!(entropic["schema"], 1);
    assert_eq!(entropic["config"]["command"], "regularity");
    assert_eq!(entropic["config"]["seed"], 0);
    let a = entropic["result"]["ahlfors"]["alpha_hat"].as_f64().unwrap();
    assert!((0.85..=1.15).contains(&a), "{a}");

    let l2 = json(&run(dir.path(), &["regularity", "--distance", "l2", "--dim", "3"]));
    assert!((l2["result"]["ahlfors"]["alpha_hat"].as_f64().unwrap() - 3.0).abs() < 1e-9);

    let osc = json(&run(dir.path(), &["regularity", "--distance", "oscillatory"]));
    assert_eq!(osc["result"]["regularity"]["verdict"], "VolumeRegularConsistent");
    assert!(osc["result"]["regularity"]["delta_limit"].is_null());
}

#[test]
fn reports_replay_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "x.csv", "0.1,0.2\n1,1\n-0.5,0.3\n0.7,-1\n");
    write(dir.path(), "y.csv", "0.4,0.2\n1.5,1\n0.5,0.9\n");
    let runs: [&[&str]; 4] = [
        &["--seed", "7", "--out", "a.json", "regularity", "--distance", "canberra"],
        &["--out", "a.json", "ecdf", "--distance", "l2", "--x", "x.csv", "--y", "y.csv"],
        &["--seed", "3", "--out", "a.json", "test", "--distance", "l1", "--x", "x.csv", "--y", "y.csv", "--kind", "cvm"],
        &["--out", "a.json", "volume", "--distance", "entropic", "--center", "1,2", "--t-grid", "0.05,0.01"],
    ];
    for args in runs {
        assert_eq!(run(dir.path(), args).status.code(), Some(0), "{args:?}");
        let first = std::fs::read(dir.path().join("a.json")).unwrap();
        let replay = run(dir.path(), &["--config", "a.json", "--out", "b.json"]);
        assert_eq!(replay.status.code(), Some(0), "{}", String::from_utf8_lossy(&replay.stderr));
        assert_eq!(std::fs::read(dir.path().join("b.json")).unwrap(), first, "{args:?}");
    }
    // a config for one command cannot drive another
    let clash = run(dir.path(), &["--config", "a.json", "regularity", "--distance", "l2"]);
    assert_eq!(clash.status.code(), Some(1));
}

#[test]
fn ecdf_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "x.csv", "1\n2\n4\n");
    write(dir.path(), "y.csv", "1\n3\n");
    let out = run(dir.path(), &["--out", "e.csv", "ecdf", "--distance", "l1", "--x", "x.csv", "--y", "y.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("e.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("t,f_xx,f_yy,f_xy,delta_k"));
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!(v[1..].iter().all(|p| (0.0..=1.0).contains(p)));
    }
}

#[test]
fn volume_csv_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--out", "v.csv", "volume", "--distance", "canberra", "--center", "5", "--t-grid", "0.05"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("v.csv")).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let exact: f64 = row[1].parse().unwrap();
    assert!((exact - 1.002_506_265_664_16).abs() < 1e-12);
}

#[test]
fn bounds_examples() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "same.json",
        r#"{"distance":{"family":"lp","params":{"p":2.0},"dim":1},
            "f":{"family":"diag_gaussian","mean":[0.0],"var":[1.0]},
            "g":{"family":"diag_gaussian","mean":[0.0],"var":[1.0]},
            "t_grid":[0.2,0.1]}"#,
    );
    let same = json(&run(dir.path(), &["bounds", "--experiment", "same.json"]));
    assert_eq!(same["result"]["all_hold"], true);
    for c in same["result"]["checks"].as_array().unwrap() {
        assert!(c["ineq_l2"]["slack"].as_f64().unwrap().abs() < 1e-12);
        assert_eq!(c["ineq_delta_k"]["slack"], 0.0);
    }

    let shift = json(&run(dir.path(), &["bounds", "--shift", "1.0", "--t-grid", "0.2"]));
    assert_eq!(shift["result"]["all_hold"], true);

    let rate = json(&run(dir.path(), &["bounds", "--ladder", "2,1,0.5,0.25", "--t-grid", "0.2"]));
    assert_eq!(rate["result"]["rate"]["theoretical_exponent"], 0.5);
    assert_eq!(rate["config"]["rate"]["alpha"], 1.0);
}

#[test]
fn numerical_failures_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "narrow.json",
        r#"{"distance":{"family":"lp","params":{"p":2.0},"dim":1},
            "f":{"family":"diag_gaussian","mean":[0.0],"var":[1.0]},
            "g":{"family":"diag_gaussian","mean":[1.0],"var":[1.0]},
            "t_grid":[0.1],
            "options":{"integration_box":{"lower":[-1.0],"upper":[1.0]}}}"#,
    );
    let out = run(dir.path(), &["bounds", "--experiment", "narrow.json"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn figures_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    for (which, files) in [
        ("fig1", vec!["fig1.csv", "fig1_canberra.svg", "fig1_euclidean.svg"]),
        ("fig2", vec!["fig2.svg", "fig2_panel1.csv", "fig2_panel8.csv"]),
    ] {
        let out = run(dir.path(), &["--out", "figs", "figures", which, "--resolution", "64"]);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(json(&out)["config"]["which"], which);
        for f in files {
            assert!(dir.path().join("figs").join(f).is_file(), "{f}");
        }
    }
}
