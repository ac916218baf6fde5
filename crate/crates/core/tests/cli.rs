use std::fs;
use std::path::Path;

use curvecount::cli::{run, EXIT_USAGE, OUT_ENV};

fn tracks() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/tracks").display().to_string()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn density_writes_csv_json_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(["curvecount", "--out", out, "density", "--root", "2,2", "--region", "tri", "--L", "1000"]), 0);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("density.json")).unwrap()).unwrap();
    let exact: f64 = json["exact_density_value"].as_str().unwrap().parse().unwrap();
    assert!((exact - 6.0 / (std::f64::consts::PI.powi(2) * 4.0)).abs() < 1e-15);
    assert!(fs::read_to_string(dir.path().join("density.csv")).unwrap().starts_with("L,count"));
    assert_eq!(manifest(dir.path())["status"], "ok");
}

#[test]
fn empty_schedule_is_a_usage_error_with_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(["curvecount", "--out", out, "density", "--root", "1,1", "--L", ""]), EXIT_USAGE);
    let m = manifest(dir.path());
    assert_eq!(m["status"], "failed");
    assert!(m["error"].as_str().unwrap().contains("empty L schedule"));
}

#[test]
fn census_rejects_a_peripheral_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_ne!(run(["curvecount", "--out", out, "census", "--traces", "3,3", "--seed", "aBAb", "--Lmax", "20"]), 0);
    assert_eq!(manifest(dir.path())["status"], "failed");
}

#[test]
fn resumed_census_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let snap = dir.path().join("snap.json");
    let common = ["census", "--traces", "3,3", "--seed", "ab", "--Lmax", "20"];
    let mut full = vec!["curvecount", "--out", a.to_str().unwrap()];
    full.extend(common);
    assert_eq!(run(full), 0);
    let mut part = vec!["curvecount", "--out", b.to_str().unwrap()];
    part.extend(common);
    part.extend(["--snapshot", snap.to_str().unwrap(), "--stop-after", "1"]);
    assert_eq!(run(part), 0);
    let mut resume = vec!["curvecount", "--out", b.to_str().unwrap()];
    resume.extend(common);
    resume.extend(["--resume", snap.to_str().unwrap()]);
    assert_eq!(run(resume), 0);
    assert_eq!(fs::read(a.join("census.csv")).unwrap(), fs::read(b.join("census.csv")).unwrap());
}

#[test]
fn normal_forms_examples_and_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let track = format!("{}/torus.track", tracks());
    for k in ["0", "1"] {
        assert_eq!(run(["curvecount", "--out", out, "normal-forms", "--track", &track, "--omega", "12,12,24", "--k", k]), 0);
        let j: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("normal_forms.json")).unwrap()).unwrap();
        assert_eq!(j["count"], 1);
    }
    let code = run(["curvecount", "--out", out, "normal-forms", "--track", &track, "--omega", "2,2,4", "--k", "2"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(manifest(dir.path())["error"].as_str().unwrap().contains("threshold"));
}

#[test]
fn output_directory_from_environment_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let env_out = dir.path().join("from-env");
    std::env::set_var(OUT_ENV, &env_out);
    assert_eq!(run(["curvecount", "density", "--root", "1,1", "--L", "50"]), 0);
    assert!(env_out.join("density.csv").exists());

    let cfg_out = dir.path().join("from-config");
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, format!("# run settings\nout = {}\nworkers = 2\n", cfg_out.display())).unwrap();
    assert_eq!(run(["curvecount", "--config", cfg.to_str().unwrap(), "density", "--root", "1,1", "--L", "50"]), 0);
    let m = manifest(&cfg_out);
    assert_eq!(m["config"]["workers"], "2");
    std::env::remove_var(OUT_ENV);
}
