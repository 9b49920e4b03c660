//! Binary-level checks: determinism of persisted results, environment
//! overrides, exit codes and the report rendering.

use std::path::Path;
use std::process::Command;

fn abscop() -> Command {
    Command::new(env!("CARGO_BIN_EXE_abscop"))
}

const TINY_CONFIG: &str = r#"
schema_version = 1
study = "cli-tiny"
seed = 424242
n = 150
repetitions = 3

[truth]
family = "clayton"
theta = 1.076
dim = 2

[[functionals]]
kind = "spearman_rho"

[abscop]
proposals = 300
level = 0.95

[baselines]
asymptotic_rho = true
"#;

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn simulate_is_byte_deterministic_across_runs_and_parallelism() {
    let work = tempfile::tempdir().unwrap();
    let config_path = work.path().join("tiny.toml");
    std::fs::write(&config_path, TINY_CONFIG).unwrap();

    let run = |out: &Path, parallelism: &str| {
        let status = abscop()
            .arg("simulate")
            .arg(&config_path)
            .arg("--out")
            .arg(out)
            .env("ABSCOP_PARALLELISM", parallelism)
            .status()
            .unwrap();
        assert!(status.success());
    };
    let out1 = work.path().join("r1");
    let out2 = work.path().join("r2");
    let out4 = work.path().join("r4");
    run(&out1, "1");
    run(&out2, "1");
    run(&out4, "4");

    for file in ["aggregate.csv", "repetitions.csv", "posterior_draws.csv"] {
        let a = read(&out1, file);
        assert_eq!(a, read(&out2, file), "{file} differs across identical runs");
        assert_eq!(
            a,
            read(&out4, file),
            "{file} differs across parallelism degrees"
        );
    }
}

#[test]
fn output_dir_env_override_applies() {
    let work = tempfile::tempdir().unwrap();
    let config_path = work.path().join("tiny.toml");
    std::fs::write(&config_path, TINY_CONFIG).unwrap();
    let out = work.path().join("env-out");
    let status = abscop()
        .arg("simulate")
        .arg(&config_path)
        .env("ABSCOP_OUT_DIR", &out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("aggregate.csv").exists());
}

#[test]
fn invalid_config_exits_with_code_two_and_names_the_field() {
    let work = tempfile::tempdir().unwrap();
    let config_path = work.path().join("bad.toml");
    std::fs::write(&config_path, TINY_CONFIG.replace("n = 150", "n = 1")).unwrap();
    let output = abscop().arg("simulate").arg(&config_path).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("config field n"), "{stderr}");
}

#[test]
fn unknown_preset_is_rejected() {
    let output = abscop()
        .arg("simulate")
        .arg("preset:does_not_exist")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn analyze_then_report_round_trip() {
    let work = tempfile::tempdir().unwrap();
    // uniform pseudo-data with a known-uniform config
    let mut csv = String::from("u,v\n");
    {
        use rand::Rng;
        let mut rng = abscop_core::rng::stream_rng(9, 9);
        for _ in 0..100 {
            csv.push_str(&format!(
                "{:.8},{:.8}\n",
                rng.random::<f64>(),
                rng.random::<f64>()
            ));
        }
    }
    let data_path = work.path().join("u.csv");
    std::fs::write(&data_path, csv).unwrap();
    let config_path = work.path().join("an.toml");
    std::fs::write(
        &config_path,
        TINY_CONFIG.replace("repetitions = 3", "repetitions = 1"),
    )
    .unwrap();
    let out = work.path().join("an-out");
    let status = abscop()
        .arg("analyze")
        .arg(&data_path)
        .arg(&config_path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());

    let report = abscop().arg("report").arg(&out).output().unwrap();
    assert!(report.status.success());
    let table = String::from_utf8_lossy(&report.stdout);
    assert!(table.contains("abscop"), "{table}");
    assert!(table.contains("freq_point"), "{table}");
}

#[test]
fn presets_list_shows_the_catalogue() {
    let output = abscop().arg("presets").arg("list").output().unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("table_ick2_clayton"));
    assert!(stdout.contains("multirho_clayton_d10"));
}
