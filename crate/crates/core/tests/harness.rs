use std::process::Command;

use magrobin::band1d::BandTable;
use magrobin::error::Error;
use magrobin::harness::{run_experiment, write_report, ExperimentKind, Outcome, RunConfig};

fn small_band_config() -> RunConfig {
    let mut c = RunConfig::new(ExperimentKind::Band);
    c.band.gamma_grid = vec![-1.0, 0.0];
    c.band.xi_range = [-4.0, 6.0, 0.5];
    c.band.p_max = 2;
    c
}

#[test]
fn config_roundtrip() {
    for kind in [
        ExperimentKind::Band,
        ExperimentKind::Limits,
        ExperimentKind::Models,
        ExperimentKind::DiskConverge,
        ExperimentKind::SquareCount,
        ExperimentKind::LtCheck,
        ExperimentKind::Validate,
    ] {
        let c = RunConfig::new(kind);
        let text = c.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), c, "{kind:?}");
    }
}

#[test]
fn invalid_configs_name_the_field() {
    let field_of = |text: &str| match RunConfig::from_toml(text) {
        Err(Error::ConfigInvalid { field, .. }) => field,
        other => panic!("expected ConfigInvalid, got {other:?}"),
    };
    let mut c = RunConfig::new(ExperimentKind::DiskConverge);
    c.tolerances.limit = -1.0;
    assert_eq!(field_of(&c.to_toml().unwrap()), "tolerances.limit");

    let mut c = RunConfig::new(ExperimentKind::DiskConverge);
    c.h_list = vec![0.05, 0.1];
    assert_eq!(field_of(&c.to_toml().unwrap()), "h_list");

    let mut c = RunConfig::new(ExperimentKind::Band);
    c.physics.alpha = 0.25;
    assert_eq!(field_of(&c.to_toml().unwrap()), "physics.alpha");

    let text = RunConfig::new(ExperimentKind::Band).to_toml().unwrap();
    assert_eq!(field_of(&text.replace("kind = \"band\"", "kind = \"spectra\"")), "config");
    assert_eq!(field_of(&format!("{text}\nunknown_key = 3\n")), "config");
}

#[test]
fn band_run_writes_table_and_anchor() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&small_band_config()).unwrap();
    assert!(report.passed());
    assert!(matches!(report.outcome, Outcome::Band { nodes, .. } if nodes == 2 * 2 * 21));
    write_report(&report, dir.path()).unwrap();
    for f in ["report.toml", "summary.txt", "bands.dat"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let table = BandTable::read(&dir.path().join("bands.dat")).unwrap();
    assert_eq!(table.diff(report.table.as_ref().unwrap(), 0.0), None);
}

#[test]
fn tampered_snapshot_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&small_band_config()).unwrap();
    write_report(&report, dir.path()).unwrap();
    let path = dir.path().join("bands.dat");
    let text = std::fs::read_to_string(&path).unwrap();
    // change the value column of one row
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let row = lines.iter().position(|l| l.starts_with("1 ")).unwrap() + 7;
    let mut cols: Vec<String> = lines[row].split_whitespace().map(String::from).collect();
    let v: f64 = cols[3].parse().unwrap();
    cols[3] = format!("{:.17e}", v + 1e-3);
    lines[row] = cols.join(" ");
    std::fs::write(&path, lines.join("\n")).unwrap();

    let tampered = BandTable::read(&path).unwrap();
    let msg = tampered.diff(report.table.as_ref().unwrap(), 1e-9).expect("diff expected");
    assert!(msg.starts_with("mu_1(gamma="), "{msg}");
}

#[test]
fn runs_are_reproducible() {
    let a = run_experiment(&small_band_config()).unwrap();
    let b = run_experiment(&small_band_config()).unwrap();
    assert_eq!(a.outcome, b.outcome);
    assert_eq!(a.checks, b.checks);
    assert_eq!(a.table, b.table);
}

#[test]
fn torus_flag_in_models_run() {
    let mut c = RunConfig::new(ExperimentKind::Models);
    c.models.torus_flux = vec![5];
    c.models.square_counts = vec![(1.0, 4.0)];
    let report = run_experiment(&c).unwrap();
    let flag = report.checks.iter().find(|k| k.name == "torus n=5 multiplicity").unwrap();
    assert!(flag.passed, "{}", flag.detail);
    assert!(report.passed());
}

#[test]
fn cli_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_magrobin");
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("band.toml");
    std::fs::write(&cfg, small_band_config().to_toml().unwrap()).unwrap();
    let out = dir.path().join("out");

    let ok = Command::new(exe)
        .args(["band", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("result: pass"));
    assert!(out.join("bands.dat").exists());

    // the config kind must match the subcommand
    let wrong = Command::new(exe).args(["models", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(wrong.status.code(), Some(2));

    std::fs::write(&cfg, "kind = \"band\"\nbogus = 1\n").unwrap();
    let bad = Command::new(exe).args(["band", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
