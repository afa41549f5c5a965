use std::process::Command;

use blowdown::harness::{
    load_config, parse_config, run_experiment, shipped_config, ExperimentConfig, ExperimentKind, ModelSpec, PointSpec,
    SHIPPED,
};
use blowdown::Error;

fn config_path(err: Error) -> String {
    match err {
        Error::Config { path, .. } => path,
        other => panic!("expected a config error, got {other}"),
    }
}

fn small_lemma2(seed: u64) -> ExperimentConfig {
    let mut c = shipped_config("lemma2-torus").unwrap();
    c.seed = seed;
    c.parameters.trials = Some(2);
    c.parameters.lambdas = Some(vec![20.0, 40.0]);
    c.parameters.spectrum_max = Some(80.0);
    c.validate().unwrap();
    c
}

#[test]
fn runs_are_reproducible_for_a_fixed_seed() {
    let a = run_experiment(&small_lemma2(5)).unwrap().deterministic_csv();
    let b = run_experiment(&small_lemma2(5)).unwrap().deterministic_csv();
    assert_eq!(a, b);
    let c = run_experiment(&small_lemma2(6)).unwrap().deterministic_csv();
    assert_ne!(a, c);
    let mut cons = shipped_config("conservation-ellipsoid").unwrap();
    cons.parameters.samples = Some(3);
    cons.parameters.diameters = Some(2.0);
    let x = run_experiment(&cons).unwrap();
    let y = run_experiment(&cons).unwrap();
    assert_eq!(x.deterministic_csv(), y.deterministic_csv());
    assert!(x.deterministic_csv().contains("# seed=11"));
}

#[test]
fn config_errors_name_the_offending_field() {
    let base = "name = \"x\"\nkind = \"maslov\"\n[model]\nkind = \"round-sphere\"\n";
    assert!(parse_config(base).is_ok());
    let e = parse_config(&format!("colour = 1\n{base}")).unwrap_err();
    assert!(config_path(e).contains("colour"));
    let e = parse_config(&format!("{base}[parameters]\norbits = 3\n")).unwrap_err();
    assert_eq!(config_path(e), "parameters.orbits");
    let e = parse_config(&format!("{base}[parameters]\nk_min = \"ten\"\n")).unwrap_err();
    assert_eq!(config_path(e), "parameters.k_min");
    let e = parse_config(&format!("{base}flattening = 2.0\n")).unwrap_err();
    assert!(config_path(e).starts_with("model"));
    let e = parse_config("name = \"x\"\nkind = \"telepathy\"\n[model]\nkind = \"round-sphere\"\n").unwrap_err();
    assert!(config_path(e).contains("kind"));
}

#[test]
fn empty_ranges_are_rejected_before_running() {
    let text = "name = \"x\"\nkind = \"quasimode\"\n[model]\nkind = \"round-sphere\"\n[parameters]\nk_min = 50\nk_max = 10\n";
    assert!(matches!(parse_config(text), Err(Error::Config { .. })));
    let mut c = ExperimentConfig::new("g", ExperimentKind::Growth, ModelSpec::preset("sphere").unwrap(), PointSpec::Pole);
    c.parameters.grid_size = Some(16);
    assert!(matches!(c.validate(), Err(Error::Config { .. })));
}

#[test]
fn configs_load_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.toml");
    std::fs::write(&path, SHIPPED.iter().find(|(n, _)| *n == "maslov-sphere").unwrap().1).unwrap();
    let c = load_config(&path).unwrap();
    assert_eq!(c.name, "maslov-sphere");
    assert!(load_config(&dir.path().join("missing.toml")).is_err());
}

#[test]
fn shipped_experiments_reproduce_their_headline_numbers() {
    let out = run_experiment(&shipped_config("growth-sphere-zonal").unwrap()).unwrap();
    let e: f64 = out.summary_value("exponent").unwrap().parse().unwrap();
    assert!((e - 0.5).abs() <= 0.02);
    let out = run_experiment(&shipped_config("classify-sor-bump").unwrap()).unwrap();
    assert_eq!(out.summary_value("identity_map"), Some("true"));
    assert!(out.summary_value("verdict").unwrap().starts_with("blow-down"));
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_blowdown"))
}

#[test]
fn cli_writes_csv_with_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("maslov.csv");
    let out = cli().args(["run", "maslov-sphere", "--out"]).arg(&csv).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("# experiment=maslov-sphere\n"));
    assert!(text.contains("# result.beta=2"));
    assert!(text.contains("\nk,r_k,eigenvalue,difference,scaled_difference\n"));
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(summary.contains("beta = 2"));
}

#[test]
fn cli_exit_codes_separate_input_and_numerical_failures() {
    let list = cli().arg("list").output().unwrap();
    assert!(list.status.success());
    assert_eq!(String::from_utf8(list.stdout).unwrap().lines().count(), SHIPPED.len());

    let empty = cli().args(["quasimode", "--k-min", "50", "--k-max", "10"]).output().unwrap();
    assert_eq!(empty.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&empty.stderr).contains("config error"));

    let dir = tempfile::tempdir().unwrap();
    let unknown = dir.path().join("unknown.toml");
    std::fs::write(&unknown, "name = \"x\"\nkind = \"flow\"\nbogus = 1\n[model]\nkind = \"round-sphere\"\n").unwrap();
    assert_eq!(cli().arg("run").arg(&unknown).output().unwrap().status.code(), Some(2));

    let wrong_model = cli().args(["quasimode", "--model", "torus"]).output().unwrap();
    assert_eq!(wrong_model.status.code(), Some(2));

    let tight = dir.path().join("tight.toml");
    std::fs::write(
        &tight,
        "name = \"tight\"\nkind = \"flow\"\n[model]\nkind = \"round-sphere\"\n[parameters]\nrtol = 1e-30\n",
    )
    .unwrap();
    let failed = cli().arg("run").arg(&tight).output().unwrap();
    assert_eq!(failed.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&failed.stderr).contains("numerical failure"));
}
