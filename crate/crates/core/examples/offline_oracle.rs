//! Hindsight optimum of the fixture day: the multiplier search on a fine
//! grid with its certified gap, checked against exhaustive search on a
//! short prefix.
//!
//! ```text
//! cargo run --release --example offline_oracle
//! ```

use std::path::Path;

use online_dr::harness::load_prices_csv;
use online_dr::model::{ConsumerConfig, PriceSeries};
use online_dr::offline::{solve_offline_bruteforce, solve_offline_lagrangian, GridSpec};

fn main() -> online_dr::Result<()> {
    let cfg = ConsumerConfig::reference_consumer();
    let prices = load_prices_csv(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/day.csv"), cfg.horizon)?;
    let x0 = cfg.default_x0();
    for n in [25, 61, 241, 961] {
        let started = std::time::Instant::now();
        let sol = solve_offline_lagrangian(&cfg, &prices, &GridSpec::new(n)?, x0, 1e-9)?;
        println!(
            "{n:>4} levels: profit {:>9.4}  gap {:.4}  delta* {:.4}  energy {:.3} MWh  {:.1} ms",
            sol.profit(),
            sol.repair_gap,
            sol.delta_star,
            sol.trajectory.total_energy(),
            1e3 * started.elapsed().as_secs_f64()
        );
    }

    // first six intervals with a proportional share of the requirement
    let short = ConsumerConfig { horizon: 6, e_total: cfg.e_total * 6.0 / cfg.horizon as f64, ..cfg.clone() };
    let head = PriceSeries::new(prices.values()[..6].to_vec())?;
    let grid = GridSpec::new(9)?;
    let (brute, _) = solve_offline_bruteforce(&short, &head, &grid, x0)?;
    let lagr = solve_offline_lagrangian(&short, &head, &grid, x0, 1e-9)?;
    println!("6 stages, 9 levels: brute force {brute:.6}, multiplier search {:.6} (gap {:.6})", lagr.cost, lagr.repair_gap);
    Ok(())
}
