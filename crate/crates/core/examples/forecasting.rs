//! Forecast quality of the shipped predictors on the fixture day.
//!
//! ```text
//! cargo run --release --example forecasting
//! ```

use std::path::Path;

use online_dr::forecast::Predictor;
use online_dr::harness::load_prices_csv;
use online_dr::model::ConsumerConfig;

fn main() -> online_dr::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let cfg = ConsumerConfig::reference_consumer();
    let prices = load_prices_csv(&root.join("fixtures/day.csv"), cfg.horizon)?;
    let history = load_prices_csv(&root.join("fixtures/prior_day.csv"), cfg.horizon)?.into_inner();
    let predictors = [
        Predictor::Perfect,
        Predictor::Noisy { sigma_rel: 0.05, seed: 7 },
        Predictor::Autoregressive { order: 12, fit_window: 288, history },
    ];
    for predictor in &predictors {
        print!("{:<32}", predictor.label());
        for window in [1, 6, 12] {
            let mut sq = 0.0;
            let mut count = 0;
            for t in 1..=cfg.horizon - window + 1 {
                let f = predictor.forecast(&prices, t, window)?;
                for (k, v) in f.values.iter().enumerate() {
                    let e = v - prices.values()[t - 1 + k];
                    sq += e * e;
                    count += 1;
                }
            }
            print!("  W {window:>2}: rmse {:>6.3}", (sq / count as f64).sqrt());
        }
        println!();
    }
    Ok(())
}
