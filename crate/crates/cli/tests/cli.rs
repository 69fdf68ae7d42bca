use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn coherent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coherent"))
        .args(args)
        .env_remove("COHERENT_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn summary_value(dir: &Path, key: &str) -> String {
    let text = fs::read_to_string(dir.join("summary.csv")).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key},")))
        .unwrap_or_else(|| panic!("{key} missing from summary"))
        .to_owned()
}

#[test]
fn single_map_run_reports_the_exact_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("single");
    let o = coherent(&["run", "single-map", "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let l2: f64 = summary_value(&out, "eigenvalue_2_re").parse().unwrap();
    assert!((l2 - (1.0 + 2f64.sqrt()) / 3.0).abs() < 1e-12);
    assert_eq!(summary_value(&out, "schema_version"), "1");
    assert_eq!(summary_value(&out, "eigenvector_2_positive_set"), "0..2");
    assert!(out.join("config.toml").exists());
}

#[test]
fn aperiodic_pair_coherence() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a4");
    let o = coherent(&["run", "aperiodic4", "--output", out.to_str().unwrap(), "--workers", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rho: f64 = summary_value(&out, "pair_plus_rho").parse().unwrap();
    assert!((rho - 0.890).abs() < 0.02);

    let plot = coherent(&["emit-plotdata", out.to_str().unwrap(), "delta-n"]);
    assert!(plot.status.success());
    let text = fs::read_to_string(out.join("plot/delta-n.dat")).unwrap();
    let ns: Vec<usize> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(ns, (2..=19).collect::<Vec<_>>());
    let again = coherent(&["emit-plotdata", out.to_str().unwrap(), "delta-n"]);
    assert!(again.status.success());
    assert_eq!(fs::read_to_string(out.join("plot/delta-n.dat")).unwrap(), text);

    for figure in ["rho-mean", "mode2-field", "threshold-curve"] {
        let o = coherent(&["emit-plotdata", out.to_str().unwrap(), figure]);
        assert!(o.status.success(), "{figure}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let field = fs::read_to_string(out.join("plot/mode2-field.dat")).unwrap();
    assert_eq!(field.lines().filter(|l| !l.starts_with('#')).count(), 100);

    let bad = coherent(&["emit-plotdata", out.to_str().unwrap(), "no-such-figure"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn dry_run_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dry");
    let o = coherent(&["run", "aperiodic4", "--dry-run", "--output", out.to_str().unwrap(), "--q", "64"]);
    assert!(o.status.success());
    assert!(!out.exists());
    let printed = String::from_utf8(o.stdout).unwrap();
    assert!(printed.contains("q = 64"));
    assert!(printed.contains("experiment = \"aperiodic4\""));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, workers) in [(&a, "1"), (&b, "3")] {
        let o = coherent(&["run", "periodic3", "--output", out.to_str().unwrap(), "--workers", workers]);
        assert!(o.status.success());
    }
    for file in ["summary.csv", "spectrum.csv", "vectors/checkpoint_2_mode_2.csv"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_coherent"))
        .args(["run", "single-map"])
        .env("COHERENT_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("single-map/summary.csv").exists());
}

#[test]
fn config_files_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    fs::write(&good, "experiment = \"wave2d\"\ncells = [12, 6]\nq = 4\nm = 2\nn_push = 1\ncheckpoints = [0.5]\n").unwrap();
    let o = coherent(&["validate-config", good.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "experiment = \"wave2d\"\nq = 10\n").unwrap();
    assert_eq!(coherent(&["validate-config", bad.to_str().unwrap()]).status.code(), Some(2));
    fs::write(&bad, "experiment = \"aperiodic4\"\nunknown_key = 1\n").unwrap();
    assert_eq!(coherent(&["validate-config", bad.to_str().unwrap()]).status.code(), Some(2));

    // A miniature flow run: file settings plus command-line overrides.
    let out = dir.path().join("wave");
    let o = coherent(&[
        "run",
        "wave2d",
        "--config",
        good.to_str().unwrap(),
        "--set",
        "flow.step = 0.05",
        "--set",
        "svd.tol = 1e-9",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let config: toml::Table = fs::read_to_string(out.join("config.toml")).unwrap().parse().unwrap();
    assert_eq!(config["flow"]["step"].as_float(), Some(0.05));
    assert_eq!(config["svd"]["tol"].as_float(), Some(1e-9));
    let o = coherent(&["emit-plotdata", out.to_str().unwrap(), "mode2-field"]);
    assert!(o.status.success());
    let field = fs::read_to_string(out.join("plot/mode2-field.dat")).unwrap();
    assert_eq!(field.lines().filter(|l| !l.starts_with('#')).count(), 72);
    assert_eq!(field.lines().nth(1).unwrap().split_whitespace().count(), 3);

    let o = coherent(&["run", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    let o = coherent(&["run", "aperiodic4", "--workers", "0", "--dry-run"]);
    assert_eq!(o.status.code(), Some(2));
}
