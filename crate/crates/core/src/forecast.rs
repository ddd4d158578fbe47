//! Look-ahead price providers for the receding-horizon solvers.
//!
//! Stage indices are 1-based: a forecast with origin `t` covers stages
//! `t, t+1, ...` and never runs past the end of the horizon.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PriceSeries;

/// Lag order of the shipped autoregressive forecaster (one hour of
/// 5-minute prices).
pub const DEFAULT_AR_ORDER: usize = 12;
/// Trailing samples used for each least-squares fit.
pub const DEFAULT_AR_WINDOW: usize = 288;
/// Extra samples required beyond the lag order before fitting.
pub const AR_MIN_EXTRA: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    pub values: Vec<f64>,
    /// First stage covered (1-based).
    pub origin: usize,
    /// Set when the autoregressive fit failed and a persistence forecast
    /// was substituted.
    pub fallback: bool,
}

impl Forecast {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn forecast_len(horizon: usize, t: usize, window: usize) -> Result<usize> {
    if t == 0 || t > horizon {
        return Err(Error::input(format!(
            "forecast origin {t} outside stages 1..={horizon}"
        )));
    }
    Ok(window.min(horizon - t + 1))
}

/// Exact prices for stages `t..t+window-1`, truncated at the horizon.
pub fn perfect_forecast(prices: &PriceSeries, t: usize, window: usize) -> Result<Forecast> {
    let len = forecast_len(prices.len(), t, window)?;
    Ok(Forecast {
        values: prices.values()[t - 1..t - 1 + len].to_vec(),
        origin: t,
        fallback: false,
    })
}

/// SplitMix64 finalizer, used to derive independent RNG streams from a
/// base seed and a stream index.
pub(crate) fn stream_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Truth corrupted by multiplicative Gaussian error: `lambda (1 + eps_k)`
/// with `eps_k ~ N(0, sigma_rel^2)`. The `k`-th draw depends only on
/// `(seed, t, k)`, so shorter windows are prefixes of longer ones.
pub fn noisy_forecast(
    prices: &PriceSeries,
    t: usize,
    window: usize,
    sigma_rel: f64,
    seed: u64,
) -> Result<Forecast> {
    if !(sigma_rel >= 0.0) || !sigma_rel.is_finite() {
        return Err(Error::param(format!("sigma_rel must be >= 0, got {sigma_rel}")));
    }
    let mut fc = perfect_forecast(prices, t, window)?;
    if sigma_rel == 0.0 {
        return Ok(fc);
    }
    let normal = Normal::new(0.0, sigma_rel).map_err(|e| Error::param(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, t as u64));
    for v in fc.values.iter_mut() {
        *v *= 1.0 + normal.sample(&mut rng);
    }
    Ok(fc)
}

/// Least-squares AR(p) with intercept, refitted on a trailing window at
/// every call and rolled forward by feeding predictions back in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Autoregressive {
    pub order: usize,
    pub fit_window: usize,
}

impl Default for Autoregressive {
    fn default() -> Self {
        Self {
            order: DEFAULT_AR_ORDER,
            fit_window: DEFAULT_AR_WINDOW,
        }
    }
}

/// Fitted coefficients: `x_k - m = c + sum_i a_i (x_{k-i} - m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArFit {
    pub mean: f64,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

impl Autoregressive {
    pub fn new(order: usize, fit_window: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::param("autoregressive order must be >= 1"));
        }
        if fit_window < order + AR_MIN_EXTRA {
            return Err(Error::param(format!(
                "fit window {fit_window} shorter than order + {AR_MIN_EXTRA}"
            )));
        }
        Ok(Self { order, fit_window })
    }

    pub fn min_history(&self) -> usize {
        self.order + AR_MIN_EXTRA
    }

    /// Ordinary least squares on the trailing `fit_window` samples.
    /// `None` when the normal equations are singular.
    pub fn fit(&self, history: &[f64]) -> Option<ArFit> {
        let p = self.order;
        let data = &history[history.len().saturating_sub(self.fit_window)..];
        let mean = data.iter().sum::<f64>() / data.len() as f64;
        let centered: Vec<f64> = data.iter().map(|v| v - mean).collect();

        let dim = p + 1;
        let mut xtx = vec![0.0; dim * dim];
        let mut xty = vec![0.0; dim];
        let mut row = vec![0.0; dim];
        for k in p..centered.len() {
            row[0] = 1.0;
            for i in 1..=p {
                row[i] = centered[k - i];
            }
            for a in 0..dim {
                xty[a] += row[a] * centered[k];
                for b in 0..dim {
                    xtx[a * dim + b] += row[a] * row[b];
                }
            }
        }
        let beta = solve_dense(&mut xtx, &mut xty, dim)?;
        Some(ArFit {
            mean,
            intercept: beta[0],
            coefficients: beta[1..].to_vec(),
        })
    }

    /// Forecast `len` values following `history`. Errors when the history is
    /// shorter than `order + 10`; falls back to persistence (flagged) when
    /// the fit is singular or the rolled-forward path diverges.
    pub fn forecast(&self, history: &[f64], origin: usize, len: usize) -> Result<Forecast> {
        if history.len() < self.min_history() {
            return Err(Error::input(format!(
                "autoregressive fit needs {} observations, have {}",
                self.min_history(),
                history.len()
            )));
        }
        let last = *history.last().expect("non-empty history");
        let persistence = || Forecast {
            values: vec![last; len],
            origin,
            fallback: true,
        };
        let Some(fit) = self.fit(history) else {
            return Ok(persistence());
        };

        let tail = &history[history.len() - self.order..];
        let mut lags: Vec<f64> = tail.iter().map(|v| v - fit.mean).collect();
        let window = &history[history.len().saturating_sub(self.fit_window)..];
        let (lo, hi) = window
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let span = (hi - lo).max(1e-9);
        let (floor, ceil) = (lo - 3.0 * span, hi + 3.0 * span);

        let mut values = Vec::with_capacity(len);
        for _ in 0..len {
            let n = lags.len();
            let next = fit.intercept
                + fit
                    .coefficients
                    .iter()
                    .enumerate()
                    .map(|(i, a)| a * lags[n - 1 - i])
                    .sum::<f64>();
            let price = next + fit.mean;
            if !price.is_finite() || price < floor || price > ceil {
                return Ok(persistence());
            }
            values.push(price);
            lags.push(next);
        }
        Ok(Forecast {
            values,
            origin,
            fallback: false,
        })
    }
}

/// AR(p) forecast of `window` stages from origin `t` with the default
/// fitting window.
pub fn ar_forecast(history: &[f64], order: usize, t: usize, window: usize) -> Result<Forecast> {
    Autoregressive::new(order, DEFAULT_AR_WINDOW.max(order + AR_MIN_EXTRA))?
        .forecast(history, t, window)
}

// Gaussian elimination with partial pivoting; `None` on a (numerically)
// singular system.
fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max).max(1e-300);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[piv * n + col].abs() <= 1e-10 * scale {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            b.swap(piv, col);
        }
        for r in col + 1..n {
            let f = a[r * n + col] / a[col * n + col];
            if f != 0.0 {
                for k in col..n {
                    a[r * n + k] -= f * a[col * n + k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r * n + k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r * n + r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// A forecast source the online runner can query at each stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Predictor {
    Perfect,
    Noisy {
        sigma_rel: f64,
        #[serde(default)]
        seed: u64,
    },
    Autoregressive {
        #[serde(default = "default_order")]
        order: usize,
        #[serde(default = "default_window")]
        fit_window: usize,
        /// Observations preceding the first stage (e.g. the previous day).
        #[serde(default)]
        history: Vec<f64>,
    },
}

fn default_order() -> usize {
    DEFAULT_AR_ORDER
}

fn default_window() -> usize {
    DEFAULT_AR_WINDOW
}

impl Predictor {
    /// Forecast for stages `t..t+window-1`. The autoregressive variant only
    /// reads prices of stages before `t`. While fewer than `order + 10`
    /// observations exist it returns a flagged persistence forecast.
    pub fn forecast(&self, prices: &PriceSeries, t: usize, window: usize) -> Result<Forecast> {
        match self {
            Predictor::Perfect => perfect_forecast(prices, t, window),
            Predictor::Noisy { sigma_rel, seed } => {
                noisy_forecast(prices, t, window, *sigma_rel, *seed)
            }
            Predictor::Autoregressive {
                order,
                fit_window,
                history,
            } => {
                let len = forecast_len(prices.len(), t, window)?;
                let model = Autoregressive::new(*order, *fit_window)?;
                let revealed = &prices.values()[..t - 1];
                let keep = model.fit_window.saturating_sub(revealed.len()).min(history.len());
                let mut obs = Vec::with_capacity(keep + revealed.len());
                obs.extend_from_slice(&history[history.len() - keep..]);
                obs.extend_from_slice(revealed);
                if obs.len() >= model.min_history() {
                    model.forecast(&obs, t, len)
                } else if let Some(&last) = obs.last() {
                    Ok(Forecast {
                        values: vec![last; len],
                        origin: t,
                        fallback: true,
                    })
                } else {
                    Err(Error::input(
                        "autoregressive predictor has no observations before the first stage",
                    ))
                }
            }
        }
    }

    /// Same predictor with its random stream re-keyed (used per simulated day).
    pub fn reseeded(&self, day_seed: u64) -> Self {
        match self {
            Predictor::Noisy { sigma_rel, seed } => Predictor::Noisy {
                sigma_rel: *sigma_rel,
                seed: stream_seed(*seed, day_seed),
            },
            other => other.clone(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Predictor::Perfect => "perfect",
            Predictor::Noisy { .. } => "noisy",
            Predictor::Autoregressive { .. } => "autoregressive",
        }
    }
}
