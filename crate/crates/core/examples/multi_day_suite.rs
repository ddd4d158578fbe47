//! A short multi-day study from a config written inline; the shipped
//! `fixtures/suite.toml` runs the same methods over 100 days.
//!
//! ```text
//! cargo run --release --example multi_day_suite
//! ```

use online_dr::harness::{run_suite, ExperimentConfig};

const CONFIG: &str = r#"
days = 10
predictor = { kind = "noisy", sigma_rel = 0.05 }

[prices]
kind = "synthetic"
first_seed = 1

[[methods]]
name = "no_prediction"
kind = "no_prediction"

[[methods]]
name = "rhgd"
kind = "rhgd"

[[methods]]
name = "rhag"
kind = "rhag"

[[methods]]
name = "robust"
kind = "robust"
"#;

fn main() -> online_dr::Result<()> {
    let mut cfg = ExperimentConfig::from_toml_str(CONFIG)?;
    cfg.out_dir = std::env::temp_dir().join("online-dr-suite");
    let (report, files) = run_suite(&cfg)?;
    println!("{:<14} {:>10} {:>8} {:>10}", "method", "profit", "ratio", "shortfall");
    for row in &report.summary {
        println!(
            "{:<14} {:>10.3} {:>7.2}% {:>10.4}",
            row.method, row.mean_profit, row.mean_ratio_pct, row.mean_shortfall_mwh
        );
    }
    println!("{} files under {}", files.len(), cfg.out_dir.display());
    Ok(())
}
