use std::path::Path;
use std::process::{Command, Output};

use uavcov::cli::{ScenarioFile, CSV_HEADER, DEFAULT_SCENARIO_TOML};

fn uavcov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uavcov")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn rows(csv_text: &str) -> Vec<Vec<String>> {
    csv_text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("scenario.toml");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn defaults_round_trip() {
    let o = uavcov(&["defaults"]);
    assert!(o.status.success());
    let printed = ScenarioFile::from_toml_str(&stdout(&o)).unwrap();
    assert_eq!(printed, ScenarioFile::from_toml_str(DEFAULT_SCENARIO_TOML).unwrap());
    assert_eq!(printed, ScenarioFile::default());
}

#[test]
fn sweep_over_density_and_altitude_grid() {
    let o = uavcov(&["sweep", "--thresholds", "0", "--antennas", "8x8"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    let rows = rows(&text);
    assert_eq!(rows.len(), 105);
    let row = rows.iter().find(|r| r[1] == "200" && r[2] == "5").unwrap();
    let v: f64 = row[5].parse().unwrap();
    assert!((v - 0.9451).abs() < 5e-5, "{v}");
    assert!(row[6..].iter().all(String::is_empty));
    assert!(stderr(&o).contains("lambda = 5 /km^2, G = 8x8: h_opt = 250 m"));
}

#[test]
fn analyze_single_point_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("point.csv");
    let o = uavcov(&[
        "analyze",
        "--height",
        "500",
        "--lambda",
        "1",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let rows = rows(&text);
    assert_eq!(rows.len(), 1);
    let v: f64 = rows[0][5].parse().unwrap();
    assert!((v - 0.2637).abs() < 5e-5, "{v}");
    assert!(stdout(&o).contains("h = 500 m"));
}

#[test]
fn validate_single_point() {
    let o = uavcov(&[
        "validate",
        "--heights",
        "150",
        "--lambdas",
        "25",
        "--thresholds",
        "5",
        "--antennas",
        "8x8",
        "--realizations",
        "1000",
        "--seed",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    let f = |i: usize| rows[0][i].parse::<f64>().unwrap();
    assert!((f(5) - 0.9865).abs() < 5e-5);
    assert!(f(7) <= f(5) && f(5) <= f(8));
    assert_eq!(rows[0][9], "1000");
    assert!(stderr(&o).contains("0 of 1 points flagged"));
}

#[test]
fn validate_is_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for workers in ["1", "3", "auto"] {
        let out = dir.path().join(format!("v{workers}.csv"));
        let o = uavcov(&[
            "validate",
            "--heights",
            "0:100:400",
            "--lambdas",
            "1,10",
            "--thresholds",
            "0",
            "--antennas",
            "8x8",
            "--realizations",
            "300",
            "--seed",
            "42",
            "--max-flagged",
            "1",
            "--workers",
            workers,
            "--output",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    assert_eq!(String::from_utf8_lossy(&outputs[0]).lines().count(), 11);
}

#[test]
fn validate_exit_status_reflects_bound() {
    // A vanishing confidence level collapses the interval onto the estimate,
    // which for one realization is 0 or 1 and so excludes the analytic value.
    let args = [
        "validate",
        "--heights",
        "200",
        "--lambdas",
        "5",
        "--thresholds",
        "0",
        "--antennas",
        "8x8",
        "--realizations",
        "1",
        "--confidence",
        "0.01",
    ];
    let mut strict = args.to_vec();
    strict.extend(["--max-flagged", "0"]);
    let o = uavcov(&strict);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("1 of 1 points flagged"));
    assert!(stderr(&o).contains("flagged: gamma = 0 dB, h = 200 m"));

    let mut lax = args.to_vec();
    lax.extend(["--max-flagged", "1"]);
    assert_eq!(uavcov(&lax).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.csv");
    let o = uavcov(&["sweep", "--heights", "", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("height grid is empty"));
    assert!(!out.exists());

    assert_eq!(uavcov(&["sweep", "--heights", "500:50:0"]).status.code(), Some(2));
    assert_eq!(uavcov(&["sweep", "--antennas", "8by8"]).status.code(), Some(2));
    assert_eq!(uavcov(&["sweep", "--workers", "0"]).status.code(), Some(2));
    assert_eq!(uavcov(&["analyze", "--lambda", "-1"]).status.code(), Some(2));
    assert_eq!(uavcov(&["validate", "--realizations", "0"]).status.code(), Some(2));
    assert_eq!(uavcov(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn config_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        &DEFAULT_SCENARIO_TOML.replace("lambda_per_km2 = 5.0", "lambda_per_km2 = -1.0"),
    );
    let o = uavcov(&["analyze", "--config", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("network.lambda_per_km2"), "{}", stderr(&o));

    let o = uavcov(&["analyze", "--config", "/nonexistent/scenario.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_drives_the_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let text = DEFAULT_SCENARIO_TOML
        .replace("thresholds_db = [-5.0, 0.0, 5.0]", "thresholds_db = [5.0]")
        .replace(
            "antenna_configs = [[8, 4], [8, 8], [64, 4], [256, 4], [256, 8]]",
            "antenna_configs = [[64, 4]]",
        )
        .replace("lambdas_per_km2 = [1.0, 5.0, 10.0, 15.0, 25.0]", "lambdas_per_km2 = [5.0]");
    let path = write_config(dir.path(), &text);
    let o = uavcov(&["sweep", "--config", &path, "--heights", "200"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][..5], ["5", "200", "5", "64", "4"]);
    let v: f64 = rows[0][5].parse().unwrap();
    assert!((v - 0.964578).abs() < 1e-5);
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = DEFAULT_SCENARIO_TOML.replace("max_depth = 40", "max_depth = 1");
    let path = write_config(dir.path(), &text);
    let o = uavcov(&["sweep", "--config", &path, "--heights", "0,200", "--lambdas", "5", "--thresholds", "0", "--antennas", "8x8"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let rows = rows(&stdout(&o));
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[5].is_empty()));
    assert!(stderr(&o).contains("failed: gamma = 0 dB"));
    assert!(stderr(&o).contains("quadrature failed"));
}

#[test]
fn tolerance_flag_is_applied() {
    let o = uavcov(&["analyze", "--tol", "1e-6"]);
    assert!(o.status.success());
    let v: f64 = rows(&stdout(&o))[0][5].parse().unwrap();
    assert!((v - 0.945149520418434).abs() < 1e-5);
    assert_eq!(uavcov(&["analyze", "--tol", "-1"]).status.code(), Some(2));
}
