//! Rolling robust re-planning on the fixture day over the uncertainty
//! budget, with noisy and autoregressive nominal forecasts.
//!
//! ```text
//! cargo run --release --example robust_baseline
//! ```

use std::path::Path;

use online_dr::forecast::Predictor;
use online_dr::harness::load_prices_csv;
use online_dr::model::ConsumerConfig;
use online_dr::offline::{run_rolling_robust, GridSpec, RobustSpec};

fn main() -> online_dr::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let cfg = ConsumerConfig::reference_consumer();
    let prices = load_prices_csv(&root.join("fixtures/day.csv"), cfg.horizon)?;
    let history = load_prices_csv(&root.join("fixtures/prior_day.csv"), cfg.horizon)?.into_inner();
    let grid = GridSpec::new(25)?;
    let predictors = [
        ("noisy 5%", Predictor::Noisy { sigma_rel: 0.05, seed: 7 }),
        ("AR(12)", Predictor::Autoregressive { order: 12, fit_window: 288, history }),
    ];
    for (label, predictor) in &predictors {
        for gamma_frac in [0.0, 0.3, 0.6, 1.0] {
            let spec = RobustSpec { gamma_frac, dev_frac: 0.05 };
            let trace = run_rolling_robust(&cfg, &prices, predictor, &spec, &grid, cfg.default_x0())?;
            println!(
                "{label:<9} gamma {gamma_frac:.1}: profit {:>8.3}  energy {:.2} MWh  {:.2} s",
                trace.profit(),
                trace.committed.total_energy(),
                trace.wall_time
            );
        }
    }
    Ok(())
}
