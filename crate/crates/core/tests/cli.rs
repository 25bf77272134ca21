use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_region-ode"))
        .args(args)
        .env_remove("REGION_ODE_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&[
        "run",
        scenario("band_example.toml").to_str().unwrap(),
        "-o",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,x1,h,surface_distance\n"));
    assert_eq!(csv.lines().count(), 100_002);
    let report = std::fs::read_to_string(dir.path().join("report.toml")).unwrap();
    assert!(report.contains("passed = true"));
    assert!(dir.path().join("events.toml").exists());
}

#[test]
fn degenerate_surface_fails_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&[
        "run",
        scenario("ball_alpha0.toml").to_str().unwrap(),
        "-o",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("transversality  fail"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("transversality"));
}

#[test]
fn check_reports_each_checker() {
    let band = scenario("band_example.toml");
    let band = band.to_str().unwrap();
    for which in ["region", "classify", "lower", "upper"] {
        let out = cli(&["check", band, "--which", which]);
        let expected = if which == "classify" { 1 } else { 0 };
        assert_eq!(code(&out), expected, "{which}: {}", stdout(&out));
    }
    let out = cli(&["check", band, "--which", "classify"]);
    assert!(stdout(&out).contains("classification = \"weak_admissible\""));

    let gamma = scenario("band_example_gamma.toml");
    assert_eq!(
        code(&cli(&[
            "check",
            gamma.to_str().unwrap(),
            "--which",
            "upper"
        ])),
        1
    );
}

#[test]
fn usage_errors_exit_two() {
    let band = scenario("band_example.toml");
    let band = band.to_str().unwrap();
    assert_eq!(code(&cli(&["check", band, "--which", "nonsense"])), 2);
    assert_eq!(
        code(&cli(&["sweep", band, "--param", "step", "--values"])),
        2
    );
    assert_eq!(
        code(&cli(&["sweep", band, "--param", "bogus", "--values", "1"])),
        2
    );
    assert_eq!(code(&cli(&["run", "/nonexistent/scenario.toml"])), 2);
    assert_eq!(code(&cli(&["frobnicate"])), 2);
    assert_eq!(code(&cli(&["--help"])), 0);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(band)
        .unwrap()
        .replace("horizon = 1.0", "horizon = 1.0\nhorizn = 2.0");
    std::fs::write(&bad, text).unwrap();
    let out = cli(&["canon", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("horizn"));
}

#[test]
fn sweep_prints_one_row_per_value() {
    let out = cli(&[
        "sweep",
        scenario("ball_example.toml").to_str().unwrap(),
        "--param",
        "alpha",
        "--values",
        "0,18.176379064",
    ]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].contains("fail"));
    assert!(rows[1].split_whitespace().nth(1) == Some("pass"));
}

#[test]
fn canon_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let first = cli(&["canon", scenario("ball_example.toml").to_str().unwrap()]);
    assert_eq!(code(&first), 0);
    let path = dir.path().join("canon.toml");
    std::fs::write(&path, &first.stdout).unwrap();
    let second = cli(&["canon", path.to_str().unwrap()]);
    assert_eq!(stdout(&first), stdout(&second));
}

#[test]
fn seed_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_region-ode"))
        .args(["canon", scenario("band_example.toml").to_str().unwrap()])
        .env("REGION_ODE_SEED", "42")
        .output()
        .unwrap();
    assert!(stdout(&out).contains("seed = 42"));
    let out = Command::new(env!("CARGO_BIN_EXE_region-ode"))
        .args(["canon", scenario("band_example.toml").to_str().unwrap()])
        .env("REGION_ODE_SEED", "x")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}
