//! Experiment configuration, price ingestion, multi-day studies and the
//! CSV files they produce.

mod output;
mod prices;
mod suite;

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::Predictor;
use crate::model::{ConsumerConfig, PriceSeries};
use crate::offline::{GridSpec, RobustSpec};
use crate::online::HyperParams;

pub use output::{
    write_gamma_sweep_csv, write_summary_csv, write_trace_csv, write_window_sweep_csv,
    GAMMA_SWEEP_HEADER, SUMMARY_HEADER, TRACE_HEADER, WINDOW_SWEEP_HEADER,
};
pub use prices::{
    gen_synthetic_prices, load_prices_csv, write_prices_csv, SyntheticParams, PRICE_HEADER,
};
pub use suite::{
    emit_gamma_sweep, emit_window_sweep, evaluate_suite, gamma_sweep, run_method, run_suite,
    window_sweep, GammaPoint, RunRecord, SuiteReport, SummaryRow, WindowPoint,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    NoPrediction,
    Rhgd,
    Rhag,
    /// Rolling robust re-planning over the remaining horizon.
    Robust,
}

impl MethodKind {
    pub fn name(&self) -> &'static str {
        match self {
            MethodKind::NoPrediction => "no_prediction",
            MethodKind::Rhgd => "rhgd",
            MethodKind::Rhag => "rhag",
            MethodKind::Robust => "robust",
        }
    }

    pub fn needs_predictor(&self) -> bool {
        !matches!(self, MethodKind::NoPrediction)
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One row of the method list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    /// Label used in output file names and the summary.
    pub name: String,
    pub kind: MethodKind,
    /// Look-ahead window; `hyper.window` when absent.
    #[serde(default)]
    pub window: Option<usize>,
    /// Overrides the experiment-wide predictor.
    #[serde(default)]
    pub predictor: Option<Predictor>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobustSettings {
    pub gamma_frac: f64,
    pub dev_frac: f64,
    /// Grid used by every rolling re-plan.
    pub n_levels: usize,
}

impl Default for RobustSettings {
    fn default() -> Self {
        let spec = RobustSpec::default();
        Self {
            gamma_frac: spec.gamma_frac,
            dev_frac: spec.dev_frac,
            n_levels: 25,
        }
    }
}

impl RobustSettings {
    pub fn spec(&self) -> RobustSpec {
        RobustSpec {
            gamma_frac: self.gamma_frac,
            dev_frac: self.dev_frac,
        }
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec {
            n_levels: self.n_levels,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OfflineSettings {
    pub n_levels: usize,
    /// Bisection tolerance on the requirement multiplier.
    pub tol: f64,
}

impl Default for OfflineSettings {
    fn default() -> Self {
        Self {
            n_levels: GridSpec::default().n_levels,
            tol: 1e-9,
        }
    }
}

/// Where daily prices come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PriceSource {
    /// A single day read from disk, optionally with the preceding
    /// observations for history-based predictors.
    Csv {
        path: PathBuf,
        #[serde(default)]
        history: Option<PathBuf>,
    },
    /// One generated day per seed. The day generated from `seed - 1` serves
    /// as history for the day generated from `seed`.
    Synthetic {
        #[serde(default = "default_first_seed")]
        first_seed: u64,
        /// Explicit seeds; `first_seed, first_seed + 1, ...` when absent.
        #[serde(default)]
        seeds: Option<Vec<u64>>,
        #[serde(default)]
        params: SyntheticParams,
    },
}

fn default_first_seed() -> u64 {
    1
}

fn default_days() -> usize {
    1
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("results")
}

/// Everything one invocation of the harness needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "ConsumerConfig::reference_consumer")]
    pub consumer: ConsumerConfig,
    #[serde(default)]
    pub hyper: HyperParams,
    pub methods: Vec<MethodSpec>,
    /// Default forecast source for methods that need one.
    #[serde(default)]
    pub predictor: Option<Predictor>,
    #[serde(default)]
    pub robust: RobustSettings,
    #[serde(default)]
    pub offline: OfflineSettings,
    pub prices: PriceSource,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "default_days")]
    pub days: usize,
    /// Consumption before the first stage; on pace (`E_T / T`) when absent.
    #[serde(default)]
    pub x0: Option<f64>,
    /// Record measured wall times. Off by default so that repeated runs
    /// write identical files.
    #[serde(default)]
    pub timing: bool,
}

/// Prices of one simulated day.
#[derive(Debug, Clone, PartialEq)]
pub struct Day {
    pub index: usize,
    pub seed: Option<u64>,
    pub prices: PriceSeries,
    /// Observations before the first stage.
    pub history: Vec<f64>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::param(format!("config: {e}")))
    }

    /// Reads a TOML config. Relative paths inside it (price files and
    /// `out_dir`) are taken relative to the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let PriceSource::Csv { path, history } = &mut self.prices {
            join(path);
            if let Some(h) = history {
                join(h);
            }
        }
        join(&mut self.out_dir);
    }

    pub fn x0(&self) -> f64 {
        self.x0.unwrap_or_else(|| self.consumer.default_x0())
    }

    pub fn offline_grid(&self) -> GridSpec {
        GridSpec {
            n_levels: self.offline.n_levels,
        }
    }

    pub fn method(&self, name: &str) -> Option<&MethodSpec> {
        self.methods.iter().find(|m| m.name == name)
    }

    /// Predictor used by `method`, falling back to the experiment default.
    pub fn predictor_for<'a>(&'a self, method: &'a MethodSpec) -> Option<&'a Predictor> {
        method.predictor.as_ref().or(self.predictor.as_ref())
    }

    /// Checks everything that can be checked without running a method.
    pub fn validate(&self) -> Result<()> {
        self.consumer.validate()?;
        self.hyper.validate()?;
        self.robust.spec().validate()?;
        self.robust.grid().validate()?;
        self.offline_grid().validate()?;
        if !(self.offline.tol > 0.0) {
            return Err(Error::param("offline.tol must be positive"));
        }
        if self.methods.is_empty() {
            return Err(Error::param("at least one method is required"));
        }
        let mut names = BTreeSet::new();
        for m in &self.methods {
            let ok_name = !m.name.is_empty()
                && m.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
            if !ok_name {
                return Err(Error::param(format!(
                    "method name `{}` must be non-empty ASCII letters, digits, `_` or `-`",
                    m.name
                )));
            }
            if !names.insert(m.name.as_str()) {
                return Err(Error::param(format!("duplicate method name `{}`", m.name)));
            }
            let window = m.window.unwrap_or(self.hyper.window);
            if matches!(m.kind, MethodKind::Rhgd | MethodKind::Rhag) && window == 0 {
                return Err(Error::param(format!("method `{}` needs a window of at least 1", m.name)));
            }
            if m.kind.needs_predictor() && self.predictor_for(m).is_none() {
                return Err(Error::input(format!(
                    "method `{}` looks ahead but no predictor is configured",
                    m.name
                )));
            }
            if m.kind == MethodKind::NoPrediction && m.window.is_some_and(|w| w > 0) {
                return Err(Error::param(format!(
                    "method `{}` uses no look-ahead; drop its window",
                    m.name
                )));
            }
        }
        if self.days == 0 {
            return Err(Error::param("days must be at least 1"));
        }
        match &self.prices {
            PriceSource::Csv { .. } if self.days != 1 => Err(Error::param(
                "a CSV price source holds one day; set days = 1",
            )),
            PriceSource::Synthetic { seeds: Some(s), params, .. } => {
                params.validate()?;
                if s.len() < self.days {
                    return Err(Error::param(format!(
                        "{} seeds listed for {} days",
                        s.len(),
                        self.days
                    )));
                }
                Ok(())
            }
            PriceSource::Synthetic { params, .. } => params.validate(),
            PriceSource::Csv { .. } => Ok(()),
        }?;
        if let Some(x0) = self.x0 {
            if !self.consumer.bounds().contains(x0) {
                return Err(Error::param(format!("x0 = {x0} lies outside the consumption box")));
            }
        }
        Ok(())
    }

    /// Seeds of the configured synthetic days.
    pub fn day_seeds(&self) -> Vec<u64> {
        match &self.prices {
            PriceSource::Csv { .. } => Vec::new(),
            PriceSource::Synthetic {
                first_seed, seeds, ..
            } => match seeds {
                Some(s) => s.iter().take(self.days).copied().collect(),
                None => (0..self.days as u64).map(|d| first_seed.wrapping_add(d)).collect(),
            },
        }
    }

    /// Materializes day `index` (0-based).
    pub fn day(&self, index: usize) -> Result<Day> {
        let horizon = self.consumer.horizon;
        match &self.prices {
            PriceSource::Csv { path, history } => {
                if index != 0 {
                    return Err(Error::param(format!("CSV source has no day {index}")));
                }
                let prices = load_prices_csv(path, horizon)?;
                let history = match history {
                    Some(h) => prices::load_price_rows(h)?,
                    None => Vec::new(),
                };
                Ok(Day {
                    index,
                    seed: None,
                    prices,
                    history,
                })
            }
            PriceSource::Synthetic { params, .. } => {
                let seed = *self
                    .day_seeds()
                    .get(index)
                    .ok_or_else(|| Error::param(format!("no seed for day {index}")))?;
                Ok(Day {
                    index,
                    seed: Some(seed),
                    prices: gen_synthetic_prices(seed, horizon, params)?,
                    history: gen_synthetic_prices(seed.wrapping_sub(1), horizon, params)?
                        .into_inner(),
                })
            }
        }
    }

    pub fn all_days(&self) -> Result<Vec<Day>> {
        (0..self.days).map(|d| self.day(d)).collect()
    }
}
