//! The RHGD trajectory on the bundled fixture is frozen in
//! `fixtures/golden_rhgd_w6.csv`. Set `UPDATE_GOLDEN=1` to rewrite it.

use std::path::{Path, PathBuf};

use online_dr::forecast::Predictor;
use online_dr::harness::{load_prices_csv, write_trace_csv};
use online_dr::model::ConsumerConfig;
use online_dr::online::{run_online, HyperParams, Method, RunTrace};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn fixture_run() -> RunTrace {
    let cfg = ConsumerConfig::reference_consumer();
    let prices = load_prices_csv(&fixtures().join("day.csv"), cfg.horizon).unwrap();
    let hp = HyperParams {
        window: 6,
        ..HyperParams::default()
    };
    run_online(Method::Rhgd, &prices, Some(&Predictor::Perfect), &cfg, &hp, cfg.default_x0()).unwrap()
}

fn read_column(text: &str, col: usize) -> Vec<f64> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn rhgd_w6_matches_golden_trajectory() {
    let golden = fixtures().join("golden_rhgd_w6.csv");
    let trace = fixture_run();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        write_trace_csv(&golden, &trace).unwrap();
    }
    let text = std::fs::read_to_string(&golden).unwrap();
    let x = read_column(&text, 1);
    let delta = read_column(&text, 2);
    assert_eq!(x.len(), 288);
    for (t, (&a, &b)) in x.iter().zip(trace.committed.values()).enumerate() {
        assert!((a - b).abs() <= 1e-12, "x at {t}: golden {a}, now {b}");
    }
    for (t, (&a, &b)) in delta.iter().zip(&trace.deltas).enumerate() {
        assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "delta at {t}: golden {a}, now {b}");
    }
}

#[test]
fn fixture_run_is_bit_identical_when_repeated() {
    let a = fixture_run();
    let b = fixture_run();
    assert_eq!(a.committed, b.committed);
    assert_eq!(a.deltas, b.deltas);
    assert_eq!(a.cumulative_cost, b.cumulative_cost);
}
