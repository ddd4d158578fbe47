//! Receding-horizon gradient descent with perfect and noisy forecasts over
//! a range of look-ahead windows.
//!
//! ```text
//! cargo run --release --example receding_horizon
//! ```

use std::path::Path;

use online_dr::forecast::Predictor;
use online_dr::harness::load_prices_csv;
use online_dr::model::ConsumerConfig;
use online_dr::online::{run_online, HyperParams, Method};

fn main() -> online_dr::Result<()> {
    let cfg = ConsumerConfig::reference_consumer();
    let prices = load_prices_csv(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/day.csv"), cfg.horizon)?;
    let noisy = Predictor::Noisy { sigma_rel: 0.05, seed: 7 };
    println!("{:>3}  {:>10}  {:>10}  {:>10}", "W", "perfect", "noisy 5%", "time (ms)");
    for window in [1, 2, 3, 6, 12, 24] {
        let hp = HyperParams { window, ..HyperParams::default() };
        let perfect = run_online(Method::Rhgd, &prices, Some(&Predictor::Perfect), &cfg, &hp, cfg.default_x0())?;
        let rough = run_online(Method::Rhgd, &prices, Some(&noisy), &cfg, &hp, cfg.default_x0())?;
        println!(
            "{window:>3}  {:>10.3}  {:>10.3}  {:>10.3}",
            perfect.profit(),
            rough.profit(),
            1e3 * perfect.wall_time
        );
    }
    Ok(())
}
