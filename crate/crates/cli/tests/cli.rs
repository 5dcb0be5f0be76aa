use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fisher-rao"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const MODEL: &str = r#"{
  "grid": {"nu0": 0.25, "bandwidth_B": 0.5, "n_freqs": 16},
  "noise": {"gamma0": 0.5},
  "rho0": 1.0,
  "endpoints": [
    {"alpha": 1.0, "phase_coeffs": [0.2, 1.0]},
    {"alpha": 2.5, "phase_coeffs": [-1.0, 3.0, 4.0]}
  ]
}"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn figure_cases_are_well_formed() {
    for case in ["case1", "case2", "case3", "case4"] {
        let out = run(&["figure", case]);
        assert!(out.status.success(), "{case}");
        let text = stdout(&out);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("b_dtau,d_full,d_alpha,ratio"));
        let rows: Vec<Vec<f64>> = lines
            .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), 400);
        assert!(rows.windows(2).all(|w| w[1][0] > w[0][0]), "{case} axis");
        for r in &rows {
            assert!(r.iter().all(|x| x.is_finite()));
            assert!(r[3] >= 1.0 - 1e-12, "{case}: ratio {} at {}", r[3], r[0]);
        }
    }
}

#[test]
fn figure_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(run(&["figure", "case2", "-o", a.to_str().unwrap()])
        .status
        .success());
    assert!(run(&["figure", "case2", "-o", b.to_str().unwrap()])
        .status
        .success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(fs::read(&a).unwrap(), run(&["figure", "case2"]).stdout);
}

#[test]
fn figure_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let cfg = format!(
        r#"{{"case_name": "short", "bandwidth_B": 0.5, "gamma_ratio": 2.0, "n_freqs": 64,
            "btau_sweep": {{"min": 0.5, "max": 4.0, "n_points": 5}}, "output_path": {:?}}}"#,
        out.to_str().unwrap()
    );
    let path = write(dir.path(), "cfg.json", &cfg);
    assert!(run(&["figure", &path]).status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().nth(1).unwrap().starts_with("0.5,"));

    let bad = run(&["figure", "case1", "-o", "/nonexistent-dir/x.csv"]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("nonexistent-dir"));
    assert!(!run(&["figure", "case7"]).status.success());
}

#[test]
fn smoke_acceptance_verdict() {
    let out = run(&["accept", "--scale", "smoke", "--seed", "1"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true);
    let criteria = v["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 13);
    for c in criteria {
        for check in c["checks"].as_array().unwrap() {
            for key in ["measured", "expected", "tolerance"] {
                assert!(check[key].is_number(), "{check}");
            }
        }
    }
    let lines = String::from_utf8_lossy(&out.stderr);
    assert_eq!(lines.lines().filter(|l| l.starts_with("PASS")).count(), 13);
    assert!(!run(&["accept", "--scale", "huge"]).status.success());
}

#[test]
fn inspect_subjects() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "model.json", MODEL);
    let out = run(&["inspect", "metric", &model]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // ω0 = 16 · (2/0.5).
    assert_eq!(
        v["endpoints"][0]["metric"]["mag_block"][0][0]
            .as_f64()
            .unwrap(),
        64.0
    );

    let out = run(&["inspect", "geodesic", &model]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let g = &v["geodesic"];
    let (k1, delta) = (g["k1"].as_f64().unwrap(), g["delta"].as_f64().unwrap());
    let expect = 1.0 + 6.25 - 5.0 * delta.cos();
    assert!((k1 - expect).abs() < 1e-12 * expect);
    assert!((v["length"].as_f64().unwrap() - (64.0 * k1).sqrt()).abs() < 1e-12 * 20.0);

    let out = run(&["inspect", "christoffel", &model]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["endpoints"].as_array().unwrap().len(), 2);
}

#[test]
fn inspect_reports_parse_location() {
    let dir = tempfile::tempdir().unwrap();
    let broken = MODEL.replace("\"alpha\": 2.5", "\"alpha\": \"big\"");
    let model = write(dir.path(), "broken.json", &broken);
    let out = run(&["inspect", "metric", &model]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("line 7") && err.contains("endpoints[1].alpha"),
        "{err}"
    );
}

#[test]
fn distance_batch() {
    let dir = tempfile::tempdir().unwrap();
    let csv = "pair,nu,gamma0,rho1,psi1,rho2,psi2,rho0\n\
               p,0.1,1,1,0,1,3.14159,1\n\
               p,0.2,1,1,0,1,3.14159,1\n\
               q,0.1,1,1,0,2,0,\n\
               q,0.2,1,2,0,1,0,\n";
    let input = write(dir.path(), "pairs.csv", csv);
    let out = run(&["distance", &input]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    let p: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(p[0], "p");
    let d_full: f64 = p[1].parse().unwrap();
    assert!((d_full - 4.0).abs() < 1e-9);
    assert!(lines[2].starts_with("q,") && lines[2].ends_with(",,,,,,"));

    let mismatched = csv.replace("q,0.2,1,2,0,1,0,", "q,0.2,1,2,0,1,0,5");
    let input = write(dir.path(), "bad.csv", &mismatched);
    assert!(!run(&["distance", &input]).status.success());
}
