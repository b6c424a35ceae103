use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
[kinematics]
branch_polar_nodes = 3
branch_azimuth_nodes = 4
sqrt_s_scan = [2.5, 10.0]

[quadrature]
energy_nodes_per_decade = 8
polar_nodes = 32
azimuth_nodes = 32

[oracle]
modes = 2
n_tr = 12
charge_scales = [1.0]

[mc]
samples = 20000
"#;

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("run.toml");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_irdeco"))
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .args(args)
        .output()
        .unwrap()
}

/// Data rows of a CSV written by the binary, comments stripped.
fn table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (header, rows) = table(path);
    let i = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn forward_kinematics_radiate_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{SMALL}\n[window]\nk_min = 1e-6\n").replace("[kinematics]\n", "[kinematics]\ntheta = 0.0\n");
    let out = run(dir.path(), &cfg, &["spectrum"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let photons = column(&dir.path().join("out/spectrum.csv"), "photons");
    assert!(!photons.is_empty());
    assert!(photons.iter().all(|&p| p == 0.0));
}

#[test]
fn decoherence_scan_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), SMALL, &["decoherence-scan"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let file = dir.path().join("out/decoherence.csv");
    let purity = column(&file, "purity");
    assert_eq!(purity.len(), 6);
    assert!(purity.windows(2).all(|w| w[1] < w[0]));
    assert!(column(&file, "trace").iter().all(|t| (t - 1.0).abs() < 1e-10));
    assert!(column(&file, "min_eigenvalue").iter().all(|&e| e > -1e-10));
}

#[test]
fn unknown_key_is_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SMALL.replace("[mc]\n", "[mc]\nsample_count = 5\n");
    let out = run(dir.path(), &cfg, &["spectrum"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sample_count"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn invalid_values_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &format!("{SMALL}\n[window]\nk_min = 1.0\nk_max = 0.1\n"), &["spectrum"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn outputs_carry_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), SMALL, &["restoration-mc", "--seed", "7"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/manifest.json")).unwrap()).unwrap();
    let hash = manifest["config_sha256"].as_str().unwrap();
    assert_eq!(manifest["config"]["mc"]["seed"], 7);
    let text = fs::read_to_string(dir.path().join("out/restoration.csv")).unwrap();
    assert!(text.lines().any(|l| l == format!("# config_sha256: {hash}")));
    assert!(text.lines().any(|l| l.starts_with("# units:")));
}

#[test]
fn thread_count_does_not_change_outputs() {
    let dirs: Vec<_> = ["1", "4"]
        .iter()
        .map(|t| {
            let dir = tempfile::tempdir().unwrap();
            let out = run(dir.path(), SMALL, &["--threads", t, "all"]);
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            dir
        })
        .collect();
    let mut files: Vec<_> = fs::read_dir(dirs[0].path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .filter(|n| n.to_string_lossy().ends_with(".csv"))
        .collect();
    files.sort();
    assert_eq!(files.len(), 10);
    for f in files {
        let a = fs::read(dirs[0].path().join("out").join(&f)).unwrap();
        let b = fs::read(dirs[1].path().join("out").join(&f)).unwrap();
        assert!(a == b, "{f:?} differs");
    }
}

#[test]
fn shipped_reference_config_matches_defaults() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("config/reference.toml");
    let cfg = irdeco::cli::RunConfig::load(&path).unwrap();
    assert_eq!(cfg, irdeco::cli::RunConfig::default());
}
