//! Price files and the synthetic price generator.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PriceSeries;

pub const PRICE_HEADER: [&str; 2] = ["interval", "price_usd_per_mwh"];

/// Reads an `interval,price_usd_per_mwh` file with 0-based contiguous
/// intervals and exactly `horizon` rows. Line numbers in errors count data
/// rows from 1, header excluded, so the row for interval `k` is line `k + 1`.
pub fn load_prices_csv(path: &Path, horizon: usize) -> Result<PriceSeries> {
    let values = read_rows(path)?;
    if values.len() != horizon {
        return Err(Error::data(
            None,
            format!("{} has {} prices, expected {horizon}", path.display(), values.len()),
        ));
    }
    PriceSeries::new(values)
}

/// Reads a price file of any nonzero length (used for predictor history).
pub(crate) fn load_price_rows(path: &Path) -> Result<Vec<f64>> {
    let values = read_rows(path)?;
    if values.is_empty() {
        return Err(Error::data(None, format!("{} has no prices", path.display())));
    }
    Ok(values)
}

fn read_rows(path: &Path) -> Result<Vec<f64>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut records = reader.records();
    let Some(header) = records.next() else {
        return Ok(Vec::new());
    };
    let header = header.map_err(|e| Error::data(None, format!("unreadable header: {e}")))?;
    if header.iter().ne(PRICE_HEADER) {
        return Err(Error::data(
            None,
            format!(
                "header must be `{}`, found `{}`",
                PRICE_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut values = Vec::new();
    for (row, record) in records.enumerate() {
        let line = row as u64 + 1;
        let record = record.map_err(|e| Error::data(Some(line), e.to_string()))?;
        if record.len() != 2 {
            return Err(Error::data(
                Some(line),
                format!("expected 2 fields, found {}", record.len()),
            ));
        }
        let interval: u64 = record[0]
            .parse()
            .map_err(|_| Error::data(Some(line), format!("bad interval `{}`", &record[0])))?;
        if interval != row as u64 {
            return Err(Error::data(
                Some(line),
                format!("interval {interval} out of sequence, expected {row}"),
            ));
        }
        let price: f64 = record[1]
            .parse()
            .map_err(|_| Error::data(Some(line), format!("bad price `{}`", &record[1])))?;
        if !price.is_finite() {
            return Err(Error::data(Some(line), format!("non-finite price {price}")));
        }
        values.push(price);
    }
    Ok(values)
}

/// Writes prices with the header read by [`load_prices_csv`]. Values use
/// the shortest representation that parses back to the same number.
pub fn write_prices_csv(path: &Path, prices: &PriceSeries) -> Result<()> {
    let mut out = String::from("interval,price_usd_per_mwh\n");
    for (i, p) in prices.values().iter().enumerate() {
        out.push_str(&format!("{i},{p}\n"));
    }
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Mean-reverting price process with occasional upward spikes:
/// `p_{t+1} = p_t + reversion (mean - p_t) + vol eps_t + spike_t`, floored
/// at zero, with `spike_t ~ Exp(mean spike_scale)` on a Bernoulli(`spike_prob`)
/// draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticParams {
    pub mean: f64,
    pub reversion: f64,
    pub vol: f64,
    pub spike_prob: f64,
    pub spike_scale: f64,
    /// First price; the mean when absent.
    pub initial: Option<f64>,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self {
            mean: 70.0,
            reversion: 0.1,
            vol: 3.0,
            spike_prob: 0.005,
            spike_scale: 20.0,
            initial: None,
        }
    }
}

impl SyntheticParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mean.is_finite() && self.mean >= 0.0) {
            return Err(Error::param(format!("mean must be finite and >= 0, got {}", self.mean)));
        }
        if !(self.reversion > 0.0 && self.reversion <= 1.0) {
            return Err(Error::param(format!(
                "reversion must lie in (0, 1], got {}",
                self.reversion
            )));
        }
        if !(self.vol.is_finite() && self.vol >= 0.0) {
            return Err(Error::param(format!("vol must be finite and >= 0, got {}", self.vol)));
        }
        if !(0.0..=1.0).contains(&self.spike_prob) {
            return Err(Error::param(format!(
                "spike_prob must lie in [0, 1], got {}",
                self.spike_prob
            )));
        }
        if !(self.spike_scale.is_finite() && self.spike_scale > 0.0) {
            return Err(Error::param(format!(
                "spike_scale must be positive, got {}",
                self.spike_scale
            )));
        }
        if let Some(p) = self.initial {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::param(format!("initial price must be >= 0, got {p}")));
            }
        }
        Ok(())
    }
}

pub fn gen_synthetic_prices(seed: u64, horizon: usize, params: &SyntheticParams) -> Result<PriceSeries> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spike = Exp::new(1.0 / params.spike_scale)
        .map_err(|e| Error::param(format!("spike scale: {e}")))?;
    let mut values = Vec::with_capacity(horizon);
    let mut p = params.initial.unwrap_or(params.mean);
    for _ in 0..horizon {
        values.push(p);
        let eps: f64 = StandardNormal.sample(&mut rng);
        let jump = if rng.random::<f64>() < params.spike_prob {
            spike.sample(&mut rng)
        } else {
            0.0
        };
        p = (p + params.reversion * (params.mean - p) + params.vol * eps + jump).max(0.0);
    }
    PriceSeries::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reads_well_formed_file() {
        let mut s = String::from("interval,price_usd_per_mwh\n");
        for i in 0..288 {
            s.push_str(&format!("{i},{}\n", 60.0 + i as f64 * 0.1));
        }
        let f = write_tmp(&s);
        let p = load_prices_csv(f.path(), 288).unwrap();
        assert_eq!(p.len(), 288);
        assert_eq!(p.values()[10], 61.0);
    }

    #[test]
    fn bad_price_names_its_line() {
        let mut s = String::from("interval,price_usd_per_mwh\n");
        for i in 0..12 {
            s.push_str(&format!("{i},50\n"));
        }
        s.push_str("12,abc\n");
        let f = write_tmp(&s);
        match load_prices_csv(f.path(), 13) {
            Err(Error::Data { line: Some(13), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_a_length_error() {
        let f = write_tmp("");
        let err = load_prices_csv(f.path(), 288).unwrap_err();
        assert!(matches!(err, Error::Data { line: None, .. }));
        assert!(err.to_string().contains("expected 288"));
    }

    #[test]
    fn rejects_gaps_wrong_header_and_short_files() {
        let f = write_tmp("interval,price_usd_per_mwh\n0,1\n2,1\n");
        assert!(matches!(
            load_prices_csv(f.path(), 2),
            Err(Error::Data { line: Some(2), .. })
        ));
        let f = write_tmp("t,price\n0,1\n");
        assert!(matches!(load_prices_csv(f.path(), 1), Err(Error::Data { .. })));
        let f = write_tmp("interval,price_usd_per_mwh\n0,1\n");
        assert!(matches!(load_prices_csv(f.path(), 2), Err(Error::Data { .. })));
        let f = write_tmp("interval,price_usd_per_mwh\n0,inf\n");
        assert!(matches!(load_prices_csv(f.path(), 1), Err(Error::Data { .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_prices_csv(Path::new("/nonexistent/prices.csv"), 1).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn quiet_process_is_constant() {
        let params = SyntheticParams {
            vol: 0.0,
            spike_prob: 0.0,
            ..SyntheticParams::default()
        };
        let p = gen_synthetic_prices(4, 50, &params).unwrap();
        assert!(p.values().iter().all(|&v| v == params.mean));
    }

    #[test]
    fn generator_is_deterministic_per_seed() {
        let params = SyntheticParams::default();
        let a = gen_synthetic_prices(9, 288, &params).unwrap();
        let b = gen_synthetic_prices(9, 288, &params).unwrap();
        let c = gen_synthetic_prices(10, 288, &params).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn default_sample_mean_is_close_to_configured_mean() {
        let params = SyntheticParams::default();
        let p = gen_synthetic_prices(2024, 10_000, &params).unwrap();
        let mean = p.values().iter().sum::<f64>() / p.len() as f64;
        assert!((mean - params.mean).abs() <= 0.05 * params.mean, "{mean}");
        let u = 69.6;
        assert!(p.values().iter().any(|&v| v > u + 5.0));
        assert!(p.values().iter().any(|&v| v < u - 5.0));
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let p = gen_synthetic_prices(77, 288, &SyntheticParams::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        write_prices_csv(&path, &p).unwrap();
        let back = load_prices_csv(&path, 288).unwrap();
        for (a, b) in p.values().iter().zip(back.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn invalid_params_are_rejected() {
        for params in [
            SyntheticParams { reversion: 0.0, ..Default::default() },
            SyntheticParams { reversion: 1.5, ..Default::default() },
            SyntheticParams { vol: -1.0, ..Default::default() },
            SyntheticParams { spike_prob: 2.0, ..Default::default() },
            SyntheticParams { spike_scale: 0.0, ..Default::default() },
        ] {
            assert!(gen_synthetic_prices(1, 10, &params).is_err());
        }
    }
}
