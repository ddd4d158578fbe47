//! Grid search over step sizes on the bundled fixture day.
//!
//! Every combination is run with perfect forecasts; combinations whose
//! long-term shortfall exceeds 5% of the requirement are discarded and the
//! most profitable survivor per method is reported. The full grid is
//! written to `fixtures/calibration.csv` (or the path given as the first
//! argument).
//!
//! ```text
//! cargo run --release --example calibrate [out.csv]
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use online_dr::forecast::Predictor;
use online_dr::harness::load_prices_csv;
use online_dr::model::{ConsumerConfig, PriceSeries};
use online_dr::online::{run_online, HyperParams, Method};

const STEPS: [f64; 5] = [0.05, 0.1, 0.26, 0.5, 1.0];
const DUAL_STEPS: [f64; 4] = [0.5, 1.0, 2.0, 5.0];
const INNER_STEPS: [f64; 4] = [0.005, 0.01, 0.02, 0.05];
const RHOS: [f64; 4] = [1.0, 5.0, 10.0, 20.0];

/// Whether RHGD profit over W = 1, 3, 6, 12 is non-decreasing within 1% of
/// its range, and RHAG is at least RHGD at W = 1 and 2.
fn window_trend(prices: &PriceSeries, cfg: &ConsumerConfig, hp: &HyperParams) -> online_dr::Result<bool> {
    let x0 = cfg.default_x0();
    let profit = |method, window| -> online_dr::Result<f64> {
        let hp = HyperParams { window, ..hp.clone() };
        Ok(run_online(method, prices, Some(&Predictor::Perfect), cfg, &hp, x0)?.profit())
    };
    let sweep = [1, 3, 6, 12]
        .into_iter()
        .map(|w| profit(Method::Rhgd, w))
        .collect::<online_dr::Result<Vec<_>>>()?;
    let range = sweep.iter().copied().fold(f64::MIN, f64::max) - sweep.iter().copied().fold(f64::MAX, f64::min);
    let monotone = sweep.windows(2).all(|p| p[1] >= p[0] - 0.01 * range);
    let accelerated = profit(Method::Rhag, 1)? >= profit(Method::Rhgd, 1)?
        && profit(Method::Rhag, 2)? >= profit(Method::Rhgd, 2)?;
    Ok(monotone && accelerated)
}

struct Row {
    method: Method,
    hp: HyperParams,
    profit: f64,
    shortfall: f64,
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| root.join("fixtures/calibration.csv"));
    let cfg = ConsumerConfig::reference_consumer();
    let prices = load_prices_csv(&root.join("fixtures/day.csv"), cfg.horizon)?;
    let x0 = cfg.default_x0();
    let base = HyperParams::default();
    let mut rows = Vec::new();

    for &eta in &STEPS {
        for &mu in &DUAL_STEPS {
            let hp = HyperParams { eta, mu, ..base.clone() };
            let trace = run_online(Method::NoPrediction, &prices, None, &cfg, &hp, x0)?;
            rows.push(Row {
                method: Method::NoPrediction,
                profit: trace.profit(),
                shortfall: trace.report.long_term_shortfall,
                hp,
            });
        }
    }
    for method in [Method::Rhgd, Method::Rhag] {
        for &eta1 in &STEPS {
            for &mu1 in &DUAL_STEPS {
                for &eta2 in &INNER_STEPS {
                    for &mu2 in &DUAL_STEPS {
                        for &rho in &RHOS {
                            let hp = HyperParams {
                                eta1,
                                mu1,
                                eta2,
                                mu2,
                                rho,
                                ..base.clone()
                            };
                            let trace = run_online(method, &prices, Some(&Predictor::Perfect), &cfg, &hp, x0)?;
                            rows.push(Row {
                                method,
                                profit: trace.profit(),
                                shortfall: trace.report.long_term_shortfall,
                                hp,
                            });
                        }
                    }
                }
            }
        }
    }

    let mut csv = String::from("method,eta,mu,eta1,mu1,eta2,mu2,rho,profit,shortfall_mwh\n");
    for r in &rows {
        let h = &r.hp;
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{:.6},{:.6}",
            r.method, h.eta, h.mu, h.eta1, h.mu1, h.eta2, h.mu2, h.rho, r.profit, r.shortfall
        )?;
    }
    std::fs::write(&out, csv)?;

    let limit = 0.05 * cfg.e_total;
    for method in [Method::NoPrediction, Method::Rhgd, Method::Rhag] {
        let best = rows
            .iter()
            .filter(|r| r.method == method && r.shortfall <= limit)
            .max_by(|a, b| a.profit.total_cmp(&b.profit));
        let defaults = rows.iter().find(|r| r.method == method && r.hp == base);
        if let Some(b) = best {
            let h = &b.hp;
            println!(
                "{method}: best profit {:.4} (eta {}, mu {}, eta1 {}, mu1 {}, eta2 {}, mu2 {}, rho {})",
                b.profit, h.eta, h.mu, h.eta1, h.mu1, h.eta2, h.mu2, h.rho
            );
            println!("  window trend holds: {}", window_trend(&prices, &cfg, h)?);
        }
        if let Some(d) = defaults {
            println!("{method}: defaults profit {:.4}, shortfall {:.4} MWh", d.profit, d.shortfall);
            println!("  window trend holds: {}", window_trend(&prices, &cfg, &d.hp)?);
        }
    }
    println!("wrote {} rows to {}", rows.len(), out.display());
    Ok(())
}
