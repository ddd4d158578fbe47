//! Primal-dual online gradient descent with no look-ahead on the fixture
//! day, for a few primal step sizes.
//!
//! ```text
//! cargo run --release --example no_prediction
//! ```

use std::path::Path;

use online_dr::harness::load_prices_csv;
use online_dr::model::ConsumerConfig;
use online_dr::online::{run_online, HyperParams, Method};

fn main() -> online_dr::Result<()> {
    let cfg = ConsumerConfig::reference_consumer();
    let prices = load_prices_csv(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/day.csv"), cfg.horizon)?;
    for eta in [0.1, 0.26, 0.5, 1.0] {
        let hp = HyperParams { eta, ..HyperParams::default() };
        let trace = run_online(Method::NoPrediction, &prices, None, &cfg, &hp, cfg.default_x0())?;
        println!(
            "eta {eta:<4}  profit {:>8.3}  energy {:>6.2} MWh  final delta {:.3}",
            trace.profit(),
            trace.committed.total_energy(),
            trace.deltas.last().copied().unwrap_or(0.0)
        );
    }
    Ok(())
}
