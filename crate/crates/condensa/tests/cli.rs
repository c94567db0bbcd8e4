use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use condensa::config::ExperimentConfig;
use condensa::{run, CliError};

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn condensa(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_condensa")).args(args).output().expect("binary runs")
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != "timing.json")
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn stationary_two_site_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = repo_config("stationary_two_site.json");
    let o = condensa(&["stationary", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("stationary.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "eta_0,eta_1,mu,mu_closed");
    assert!(!text.contains('\r'));
    // w(2) = d(1+d)/2 = 0.055, w(1)² = d² = 0.01; Z = 2·0.055 + 0.01 = 0.12
    let want = [0.055 / 0.12, 0.01 / 0.12, 0.055 / 0.12];
    for (line, w) in lines[1..].iter().zip(want) {
        let mu: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((mu - w).abs() < 1e-14, "{line}");
    }
}

#[test]
fn same_seed_same_bytes() {
    for (kind, file) in [("simulate", "simulate_cycle.json"), ("meanrate", "meanrate_three_cycle.json")] {
        let cfg = repo_config(file);
        let dir = tempfile::tempdir().unwrap();
        let runs: Vec<_> = ["1", "3"]
            .iter()
            .map(|threads| {
                for e in fs::read_dir(dir.path()).unwrap() {
                    fs::remove_file(e.unwrap().path()).unwrap();
                }
                let o = condensa(&[
                    kind,
                    "--config",
                    cfg.to_str().unwrap(),
                    "--out",
                    dir.path().to_str().unwrap(),
                    "--seed",
                    "11",
                    "--threads",
                    threads,
                ]);
                assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
                read_dir_sorted(dir.path())
            })
            .collect();
        assert!(runs[0].len() >= 2);
        assert_eq!(runs[0], runs[1], "{kind}");
    }
}

#[test]
fn seed_changes_simulation() {
    let cfg = ExperimentConfig::load(&repo_config("simulate_cycle.json")).unwrap();
    let a = run(&cfg, 1).unwrap().1;
    let b = run(&cfg, 2).unwrap().1;
    assert_ne!(a, b);
}

#[test]
fn negative_d_is_a_config_error() {
    let text = fs::read_to_string(repo_config("stationary_two_site.json")).unwrap().replace("0.1", "-0.1");
    match ExperimentConfig::from_json(&text) {
        Err(CliError::Config { path, .. }) => assert_eq!(path, "params.d_N"),
        other => panic!("{other:?}"),
    }
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.json");
    fs::write(&file, text).unwrap();
    let o = condensa(&["stationary", "--config", file.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("params.d_N"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(condensa(&["verify", "--level", "medium"]).status.code(), Some(1));
    assert_eq!(condensa(&["stationary"]).status.code(), Some(1));
    let cfg = repo_config("stationary_two_site.json");
    let o = condensa(&["classify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not match"));
}

#[test]
fn report_echoes_config() {
    for file in [
        "stationary_two_site.json",
        "classify_chain.json",
        "simulate_cycle.json",
        "meanrate_three_cycle.json",
        "nucleation_complete.json",
        "thermo_drift.json",
    ] {
        let cfg = ExperimentConfig::load(&repo_config(file)).unwrap();
        let again = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again, "{file}");
        let mut with_seed = cfg.clone();
        with_seed.seed = Some(cfg.seed.unwrap_or(condensa::DEFAULT_SEED));
        let text = serde_json::to_string(&with_seed).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), with_seed, "{file}");
    }
    let cfg = ExperimentConfig::load(&repo_config("classify_chain.json")).unwrap();
    let (report, _, _) = run(&cfg, 5).unwrap();
    let echoed: ExperimentConfig = serde_json::from_value(serde_json::to_value(&report.config).unwrap()).unwrap();
    assert_eq!(echoed.seed, Some(5));
    assert_eq!(ExperimentConfig { seed: None, ..echoed }, cfg);
}

#[test]
fn thermo_small_run() {
    let text = fs::read_to_string(repo_config("thermo_drift.json"))
        .unwrap()
        .replace("\"replicas\": 64", "\"replicas\": 4")
        .replace("\"window\": 4.0", "\"window\": 0.5")
        .replace("[0.5, 1.0, 2.0]", "[0.25, 0.5]");
    let cfg = ExperimentConfig::from_json(&text).unwrap();
    let (report, files, _) = run(&cfg, 3).unwrap();
    let names: Vec<&str> = files.iter().map(|f| f.0.as_str()).collect();
    assert_eq!(names, ["torus_rates.csv", "generator_gap.csv", "condensate.csv", "thermo.json"]);
    let gaps = &report.metrics["generator_gap"];
    let g: Vec<f64> = (0..3).map(|i| gaps[i]["formula"].as_f64().unwrap()).collect();
    assert!(g[0] > g[1] && g[1] > g[2]);
}
