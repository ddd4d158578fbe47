//! Generates a synthetic day, writes it as CSV and reads it back.
//!
//! ```text
//! cargo run --release --example synthetic_prices [seed]
//! ```

use online_dr::harness::{gen_synthetic_prices, load_prices_csv, write_prices_csv, SyntheticParams};

fn main() -> online_dr::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let params = SyntheticParams::default();
    let prices = gen_synthetic_prices(seed, 288, &params)?;
    let v = prices.values();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let below = v.iter().filter(|&&p| p < 69.6).count();
    println!(
        "seed {seed}: mean {mean:.2}, min {:.2}, max {:.2}, {below} of {} intervals below the utility price",
        v.iter().copied().fold(f64::INFINITY, f64::min),
        v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        v.len()
    );
    let dir = std::env::temp_dir().join("online-dr-example");
    std::fs::create_dir_all(&dir).map_err(|e| online_dr::Error::Io { path: dir.clone(), source: e })?;
    let path = dir.join(format!("prices_{seed}.csv"));
    write_prices_csv(&path, &prices)?;
    assert_eq!(load_prices_csv(&path, 288)?, prices);
    println!("round trip through {} is exact", path.display());
    Ok(())
}
