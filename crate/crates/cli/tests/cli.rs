use std::path::Path;
use std::process::{Command, Output};

fn pdmosc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdmosc")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn column(csv: &str, idx: usize) -> Vec<f64> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

const SQRT8: &str = "2.8284271247461903";

#[test]
fn spectrum_reference_rows() {
    let o = pdmosc(&["spectrum", "--nmax", "2"]);
    assert!(o.status.success());
    let csv = stdout(&o);
    assert!(csv.starts_with("# alpha=3"));
    let e = column(&csv, 1);
    for (x, want) in e.iter().zip([15.0, 55.0, 119.0]) {
        assert!((x - want).abs() <= 1e-13 * want);
    }
    // 17 significant digits
    let first = csv.lines().nth(2).unwrap().split(',').nth(1).unwrap();
    assert_eq!(first, "1.5000000000000000e1");
}

#[test]
fn spectrum_line_interleaves_parities_and_oracle_agrees() {
    let o = pdmosc(&[
        "spectrum",
        "--alpha",
        "1",
        "--omega",
        SQRT8,
        "--sector",
        "line:even",
        "--oracle",
    ]);
    assert!(o.status.success());
    let csv = stdout(&o);
    assert!(csv.lines().nth(1).unwrap().ends_with("E_closed,E_oracle"));
    let closed = column(&csv, 1);
    let oracle = column(&csv, 2);
    for ((c, o), want) in closed.iter().zip(&oracle).zip([2.0, 7.0, 14.0, 23.0]) {
        assert!((c - want).abs() <= 1e-13 * want);
        assert!((o - want).abs() <= 1e-6 * want);
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    let o = pdmosc(&["spectrum", "--alpha", "0"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));
    assert!(!pdmosc(&["spectrum", "--sector", "radial:1,0"]).status.success());
    assert!(!pdmosc(&[]).status.success());
}

#[test]
fn wavefunction_columns_and_nodes() {
    let o = pdmosc(&["wavefunction", "--nmax", "1", "--grid-n", "401"]);
    assert!(o.status.success());
    let csv = stdout(&o);
    let header = csv.lines().nth(1).unwrap();
    assert_eq!(header.split(',').count(), 2 + 2);
    let psi0 = column(&csv, 2);
    let psi1 = column(&csv, 3);
    assert!(psi0[1..].iter().all(|&v| v > 0.0));
    let changes = psi1[1..].windows(2).filter(|w| w[0] * w[1] < 0.0).count();
    assert_eq!(changes, 1);
}

#[test]
fn output_is_deterministic_and_goes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = pdmosc(&[
            "oracle-compare",
            "--nmax",
            "1",
            "--grid-n",
            "400",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        assert!(o.stdout.is_empty());
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(x, y);
    let text = String::from_utf8(x).unwrap();
    assert_eq!(
        text.lines().nth(1),
        Some("n,E_closed,E_h,E_h2,E_extrap,rel_err,overlap")
    );
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn config_file_is_read_and_strict() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(
        dir.path(),
        "line.json",
        r#"{"alpha": 1.0, "omega": 2.8284271247461903, "sector": {"type": "line", "parity": "odd"}, "nmax": 1}"#,
    );
    let o = pdmosc(&["spectrum", "--config", &good]);
    assert!(o.status.success());
    let csv = stdout(&o);
    assert!(csv.contains("sector=line:odd"));
    assert_eq!(column(&csv, 1).len(), 2);
    // flags override the file
    let o = pdmosc(&["spectrum", "--config", &good, "--nmax", "3"]);
    assert_eq!(column(&stdout(&o), 1).len(), 4);

    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"alpha": 1.0, "omega": 1.0, "sector": {"type": "radial", "d": 3, "l": 0}, "colour": 1}"#,
    );
    let o = pdmosc(&["spectrum", "--config", &bad]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
}

#[test]
fn verify_passes_by_default_and_fails_on_coarse_grid() {
    let o = pdmosc(&["verify"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["pass"], true);
    assert_eq!(report["suites"].as_array().unwrap().len(), 8);

    let o = pdmosc(&["verify", "--grid-n", "101"]);
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["pass"], false);
    let failed: Vec<&serde_json::Value> = report["suites"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|s| s["checks"].as_array().unwrap())
        .filter(|c| c["pass"] == false)
        .collect();
    assert!(!failed.is_empty());
    assert!(failed
        .iter()
        .all(|c| c["relative"].is_number() && c["identity"].is_string()));
}

#[test]
fn limit_sweep_and_slopes() {
    let o = pdmosc(&[
        "limit",
        "--nmax",
        "2",
        "--alpha-min",
        "1e-5",
        "--alpha-max",
        "1e-1",
        "--json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for s in v["slopes"].as_array().unwrap() {
        for key in ["energy", "raise"] {
            let p = s[key].as_f64().unwrap();
            assert!((p - 1.0).abs() <= 0.05, "{key} {p}");
        }
    }
    let csv = stdout(&pdmosc(&["limit", "--nmax", "0"]));
    assert!(csv.starts_with("# omega=4"));
    // smallest alpha: deviation/alpha at the first-order prediction
    let last = csv.lines().last().unwrap();
    let f: Vec<f64> = last.split(',').map(|x| x.parse().unwrap()).collect();
    assert!((f[0] - 1e-6).abs() < 1e-12);
    assert!((f[5] / f[6] - 1.0).abs() < 1e-4);
}

#[test]
fn irrep_tables() {
    let o = pdmosc(&[
        "irrep",
        "--alpha",
        "1",
        "--omega",
        SQRT8,
        "--sector",
        "line:even",
        "--json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let p0s: Vec<f64> = v["lowest_weight_candidates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["p0"].as_f64().unwrap())
        .collect();
    assert_eq!(p0s, [0.5, 1.0]);
    let csv = stdout(&pdmosc(&["irrep", "--nmax", "2"]));
    assert!(!csv.contains("NaN"));
    assert!(csv.contains("p0,n,lambda,a_sq,a,b,g,tau"));
}
