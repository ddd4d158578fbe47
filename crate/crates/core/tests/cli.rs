use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dr-bench")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn gen_prices_reproduces_the_fixture_day() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench(&["gen-prices", "--seed", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let generated = std::fs::read(dir.path().join("prices_1.csv")).unwrap();
    assert_eq!(generated, std::fs::read(fixtures().join("day.csv")).unwrap());
}

#[test]
fn run_writes_summary_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixtures().join("experiment.toml");
    let out = bench(&["run", "--config", config.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("summary.csv").exists());
    assert_eq!(std::fs::read_dir(dir.path().join("traces")).unwrap().count(), 5);
}

#[test]
fn sweeps_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixtures().join("experiment.toml");
    let (config, d) = (config.to_str().unwrap(), dir.path().to_str().unwrap());
    let out = bench(&["sweep-w", "--config", config, "--out", d, "--method", "rhag", "--windows", "1,2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("window_sweep_rhag.csv").exists());
    let out = bench(&["sweep-gamma", "--config", config, "--out", d, "--gammas", "0,1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("gamma_sweep.csv").exists());
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixtures().join("experiment.toml");
    let (config, d) = (config.to_str().unwrap(), dir.path().to_str().unwrap());
    assert_eq!(code(&bench(&["frobnicate"])), 2);
    assert_eq!(code(&bench(&["run"])), 2);
    assert_eq!(code(&bench(&["sweep-w", "--config", config, "--out", d, "--windows", "0"])), 2);
    assert_eq!(code(&bench(&["run", "--config", config, "--out", d, "--seed", "3"])), 2);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "days = 1\nmystery = true\n").unwrap();
    assert_eq!(code(&bench(&["run", "--config", bad.to_str().unwrap()])), 2);
}

#[test]
fn data_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let prices = dir.path().join("prices.csv");
    std::fs::write(&prices, "interval,price_usd_per_mwh\n0,70\n1,nan\n").unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        "[[methods]]\nname = \"np\"\nkind = \"no_prediction\"\n\n[prices]\nkind = \"csv\"\npath = \"prices.csv\"\n",
    )
    .unwrap();
    let out = bench(&["run", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    let missing = dir.path().join("none.toml");
    assert_eq!(code(&bench(&["run", "--config", missing.to_str().unwrap()])), 3);
}
