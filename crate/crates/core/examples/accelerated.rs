//! The accelerated receding-horizon method against plain gradient steps,
//! and the offline smoothed problem solved both ways.
//!
//! ```text
//! cargo run --release --example accelerated
//! ```

use std::path::Path;

use online_dr::forecast::Predictor;
use online_dr::harness::load_prices_csv;
use online_dr::model::ConsumerConfig;
use online_dr::online::smoothed::{Scheme, SmoothedProblem};
use online_dr::online::{run_online, HyperParams, Method};

fn main() -> online_dr::Result<()> {
    let cfg = ConsumerConfig::reference_consumer();
    let prices = load_prices_csv(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/day.csv"), cfg.horizon)?;
    let x0 = cfg.default_x0();
    let base = HyperParams::default();
    println!("momentum xi = {:.3}", base.xi()?);
    for window in [1, 2, 3, 6] {
        let hp = HyperParams { window, ..base.clone() };
        let g = run_online(Method::Rhgd, &prices, Some(&Predictor::Perfect), &cfg, &hp, x0)?;
        let a = run_online(Method::Rhag, &prices, Some(&Predictor::Perfect), &cfg, &hp, x0)?;
        println!("W {window}: rhgd {:.3}  rhag {:.3}", g.profit(), a.profit());
    }

    let problem = SmoothedProblem { prices: &prices, cfg: &cfg, x0, rho: base.rho, delta: 0.0 };
    let gd = problem.minimize(Scheme::Gradient, 1e-6, 1_000_000)?;
    let nest = problem.minimize(Scheme::Nesterov { xi: problem.default_momentum()? }, 1e-6, 1_000_000)?;
    println!(
        "smoothed problem to 1e-6: gradient descent {} iterations, nesterov {} (objective {:.4} vs {:.4})",
        gd.iterations,
        nest.iterations,
        problem.objective(&gd.x),
        problem.objective(&nest.x)
    );
    Ok(())
}
