use std::process::{Command, Output};

use edgedp_spectral::accounting::{sigma_basic, sigma_for_budget};
use edgedp_spectral::bounds::{converse_min_n, AccuracyTarget, PackingExponent};
use edgedp_spectral::experiment::CSV_HEADER;

fn edgedp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edgedp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn value_after(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().parse().unwrap()))
        .unwrap_or_else(|| panic!("no `{key}` in {text}"))
}

#[test]
fn account_matches_library() {
    let text = stdout(&edgedp(&["account", "--eps", "1", "--delta", "1e-6", "--n-steps", "8"]));
    assert_eq!(value_after(&text, "sigma "), sigma_for_budget(1.0, 1e-6, 8).unwrap());
    assert_eq!(value_after(&text, "sigma_basic "), sigma_basic(1.0, 1e-6, 8).unwrap());

    let text = stdout(&edgedp(&["account", "--eps", "1", "--sigma", "11.949196363914628", "--n-steps", "8"]));
    assert!((value_after(&text, "delta ") - 1e-6).abs() < 1e-12);
}

#[test]
fn converse_matches_library() {
    let text = stdout(&edgedp(&[
        "bounds", "--converse", "--beta", "0.05", "--eta", "0.01", "--eps", "1", "--p", "0.25", "--q", "0.0025",
    ]));
    let target = AccuracyTarget::new(0.05, 0.01).unwrap();
    let want = converse_min_n(&target, 1.0, 0.25, 0.0025, PackingExponent::Derived).unwrap();
    assert_eq!(text.trim().parse::<f64>().unwrap(), want);
}

#[test]
fn bound_table_as_csv() {
    let text = stdout(&edgedp(&["bounds", "--eps", "1", "--p", "0.2", "--q", "0.02", "--n", "200", "--csv"]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("quantity,value"));
    let keys: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    for key in ["converse_min_n", "rr_distance", "subsample_m", "npi_sigma", "npi_distance", "gap_lambda1_lower"] {
        assert!(keys.contains(&key), "{key} missing from {keys:?}");
    }
}

#[test]
fn malformed_input_exits_nonzero() {
    for args in [
        vec!["sweep", "--mechanism", "bogus", "--n", "20", "--eps", "1", "--p", "0.5", "--q", "0.1"],
        vec!["sweep", "--n", "20"],
        vec!["account", "--eps", "one", "--delta", "0.1"],
        vec!["account", "--eps", "1", "--delta", "2"],
        vec!["bounds", "--eps", "1", "--p", "0.2", "--q", "0.02"],
        vec!["frobnicate"],
    ] {
        let out = edgedp(&args);
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn sweep_from_spec_file_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    let out = dir.path().join("out.csv");
    std::fs::write(
        &spec,
        r#"{"mechanisms": ["rr", "npi", "nonprivate"], "eps": [1.0, 8.0], "n": [30],
            "p": 0.5, "q": 0.05, "delta": "inverse_square", "trials": 4, "seed": 3, "timing": false}"#,
    )
    .unwrap();
    let printed = stdout(&edgedp(&["sweep", "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap()]));
    assert!(printed.is_empty());
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.ends_with(",0.0,ok")), "{rows:?}");
}

#[test]
fn grid_sweep_to_stdout_is_reproducible() {
    let args = [
        "sweep", "--mechanism", "npi,npi_init", "--n", "24", "--eps", "2", "--p", "0.6", "--q", "0.1", "--trials",
        "3", "--seed", "5", "--no-timing",
    ];
    let a = stdout(&edgedp(&args));
    let b = stdout(&edgedp(&args));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 3);
}

#[test]
fn spec_conflicts_with_grid_flags() {
    let out = edgedp(&["sweep", "--spec", "x.json", "--n", "20"]);
    assert!(!out.status.success());
}

#[test]
fn polblogs_runs_on_a_small_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("edges.txt");
    let labels = dir.path().join("labels.txt");
    // Two 5-cliques joined by one edge, 1-based ids.
    let mut e = String::new();
    for block in [1, 6] {
        for i in block..block + 5 {
            for j in (i + 1)..block + 5 {
                e.push_str(&format!("{i} {j}\n"));
            }
        }
    }
    e.push_str("5 6\n");
    std::fs::write(&edges, e).unwrap();
    let l: String = (1..=10).map(|i| format!("{i} {}\n", i32::from(i > 5))).collect();
    std::fs::write(&labels, l).unwrap();

    let text = stdout(&edgedp(&[
        "polblogs",
        "--edges",
        edges.to_str().unwrap(),
        "--labels",
        labels.to_str().unwrap(),
        "--eps",
        "30",
        "--trials",
        "3",
        "--no-timing",
    ]));
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("baseline,10,,,0.0,1,1.0,"));
    for name in ["private_init", "fixed_init", "graph_perturb"] {
        assert!(rows.iter().any(|r| r.starts_with(name) && r.ends_with(",ok")), "{name}: {rows:?}");
    }
}
