//! Running configured methods over days, comparing with the hindsight
//! optimum and sweeping window length or uncertainty budget.

use std::path::PathBuf;

use super::output::{write_gamma_sweep_csv, write_summary_csv, write_trace_csv, write_window_sweep_csv};
use super::{Day, ExperimentConfig, MethodKind, MethodSpec};
use crate::error::{Error, Result};
use crate::forecast::Predictor;
use crate::offline::{robust_inner, run_rolling_robust, solve_offline_lagrangian, OfflineSolution};
use crate::online::{run_online, HyperParams, Method, RunTrace};

/// Aggregate over days for one method.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: String,
    pub mean_profit: f64,
    /// `100 * profit / offline profit`, averaged over the days whose offline
    /// profit is positive; NaN when there are none.
    pub mean_ratio_pct: f64,
    pub mean_shortfall_mwh: f64,
    pub mean_wall_time_s: f64,
}

/// One method on one day.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub method: String,
    pub day: usize,
    pub seed: Option<u64>,
    pub profit: f64,
    pub offline_profit: f64,
    /// NaN when the offline profit is not positive.
    pub ratio_pct: f64,
    /// Ratio the method could reach if the offline solution were off by its
    /// full certified gap, `100 (offline profit + gap) / offline profit`.
    pub ratio_ceiling_pct: f64,
    pub trace: RunTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    /// Sorted by method name, then day.
    pub runs: Vec<RunRecord>,
    /// One entry per day.
    pub offline: Vec<OfflineSolution>,
    /// Sorted by method name.
    pub summary: Vec<SummaryRow>,
    /// Days left out of the ratio means because even the offline optimum
    /// makes no profit on them.
    pub unprofitable_days: Vec<usize>,
}

impl SuiteReport {
    pub fn row(&self, method: &str) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.method == method)
    }
}

fn day_label(day: &Day) -> String {
    match day.seed {
        Some(s) => format!("day {} (seed {s})", day.index),
        None => format!("day {}", day.index),
    }
}

/// Per-day copy of `p`: noisy streams keyed to the day, and history-based
/// predictors given the day's preceding observations unless they carry
/// their own.
fn predictor_for_day(p: &Predictor, day: &Day) -> Predictor {
    let p = match day.seed {
        Some(seed) => p.reseeded(seed),
        None => p.clone(),
    };
    match p {
        Predictor::Autoregressive {
            order,
            fit_window,
            history,
        } if history.is_empty() => Predictor::Autoregressive {
            order,
            fit_window,
            history: day.history.clone(),
        },
        other => other,
    }
}

/// Runs one configured method on one day.
pub fn run_method(cfg: &ExperimentConfig, method: &MethodSpec, day: &Day) -> Result<RunTrace> {
    let x0 = cfg.x0();
    let predictor = cfg.predictor_for(method).map(|p| predictor_for_day(p, day));
    let hp = HyperParams {
        window: method.window.unwrap_or(cfg.hyper.window),
        ..cfg.hyper.clone()
    };
    let missing = || Error::input(format!("method `{}` has no predictor", method.name));
    let result = match method.kind {
        MethodKind::NoPrediction => {
            run_online(Method::NoPrediction, &day.prices, None, &cfg.consumer, &hp, x0)
        }
        MethodKind::Rhgd | MethodKind::Rhag => {
            let m = if method.kind == MethodKind::Rhgd {
                Method::Rhgd
            } else {
                Method::Rhag
            };
            let p = predictor.as_ref().ok_or_else(missing)?;
            run_online(m, &day.prices, Some(p), &cfg.consumer, &hp, x0)
        }
        MethodKind::Robust => {
            let p = predictor.as_ref().ok_or_else(missing)?;
            run_rolling_robust(
                &cfg.consumer,
                &day.prices,
                p,
                &cfg.robust.spec(),
                &cfg.robust.grid(),
                x0,
            )
        }
    };
    result.map_err(|e| e.context(format!("{}, method `{}`", day_label(day), method.name)))
}

fn offline_for(cfg: &ExperimentConfig, day: &Day) -> Result<OfflineSolution> {
    solve_offline_lagrangian(
        &cfg.consumer,
        &day.prices,
        &cfg.offline_grid(),
        cfg.x0(),
        cfg.offline.tol,
    )
    .map_err(|e| e.context(format!("{}, offline optimum", day_label(day))))
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Runs every method on every configured day without writing files.
pub fn evaluate_suite(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let days = cfg.all_days()?;
    let mut offline = Vec::with_capacity(days.len());
    let mut runs = Vec::with_capacity(days.len() * cfg.methods.len());
    let mut unprofitable_days = Vec::new();
    for day in &days {
        let best = offline_for(cfg, day)?;
        let ratio_ok = best.profit() > 0.0;
        if !ratio_ok {
            unprofitable_days.push(day.index);
        }
        for method in &cfg.methods {
            let trace = run_method(cfg, method, day)?;
            let profit = trace.profit();
            runs.push(RunRecord {
                method: method.name.clone(),
                day: day.index,
                seed: day.seed,
                profit,
                offline_profit: best.profit(),
                ratio_pct: if ratio_ok { 100.0 * profit / best.profit() } else { f64::NAN },
                ratio_ceiling_pct: if ratio_ok {
                    100.0 * (best.profit() + best.repair_gap) / best.profit()
                } else {
                    f64::NAN
                },
                trace,
            });
        }
        offline.push(best);
    }
    runs.sort_by(|a, b| a.method.cmp(&b.method).then(a.day.cmp(&b.day)));

    let mut names: Vec<&str> = cfg.methods.iter().map(|m| m.name.as_str()).collect();
    names.sort_unstable();
    let summary = names
        .into_iter()
        .map(|name| {
            let rows = || runs.iter().filter(move |r| r.method == name);
            SummaryRow {
                method: name.to_string(),
                mean_profit: mean(rows().map(|r| r.profit)),
                mean_ratio_pct: mean(rows().map(|r| r.ratio_pct).filter(|r| !r.is_nan())),
                mean_shortfall_mwh: mean(rows().map(|r| r.trace.report.long_term_shortfall)),
                mean_wall_time_s: if cfg.timing {
                    mean(rows().map(|r| r.trace.wall_time))
                } else {
                    0.0
                },
            }
        })
        .collect();
    Ok(SuiteReport {
        runs,
        offline,
        summary,
        unprofitable_days,
    })
}

fn create_dir(dir: &std::path::Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Runs the study and writes `summary.csv` plus one trace per method and
/// day under `traces/` in the output directory. Returns the report and the
/// files written.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<(SuiteReport, Vec<PathBuf>)> {
    let report = evaluate_suite(cfg)?;
    let trace_dir = cfg.out_dir.join("traces");
    create_dir(&trace_dir)?;
    let mut files = Vec::new();
    for run in &report.runs {
        let path = trace_dir.join(format!("{}_day{:03}.csv", run.method, run.day));
        write_trace_csv(&path, &run.trace)?;
        files.push(path);
    }
    let summary = cfg.out_dir.join("summary.csv");
    write_summary_csv(&summary, &report.summary)?;
    files.push(summary);
    Ok((report, files))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowPoint {
    pub window: usize,
    pub profit: f64,
    pub wall_time_s: f64,
}

/// Profit and measured run time of `method` on the first configured day for
/// each look-ahead window, with the experiment-wide predictor.
pub fn window_sweep(cfg: &ExperimentConfig, method: Method, windows: &[usize]) -> Result<Vec<WindowPoint>> {
    if method == Method::NoPrediction {
        return Err(Error::param("window sweeps need rhgd or rhag"));
    }
    if let Some(&w) = windows.iter().find(|&&w| w == 0) {
        return Err(Error::param(format!("window {w} is not valid for {method}")));
    }
    if windows.is_empty() {
        return Err(Error::param("no windows to sweep"));
    }
    let predictor = cfg
        .predictor
        .as_ref()
        .ok_or_else(|| Error::input("window sweeps need an experiment-wide predictor"))?;
    cfg.consumer.validate()?;
    cfg.hyper.validate()?;
    let day = cfg.day(0)?;
    let predictor = predictor_for_day(predictor, &day);
    windows
        .iter()
        .map(|&window| {
            let hp = HyperParams {
                window,
                ..cfg.hyper.clone()
            };
            let trace = run_online(method, &day.prices, Some(&predictor), &cfg.consumer, &hp, cfg.x0())
                .map_err(|e| e.context(format!("{method} with W = {window}")))?;
            Ok(WindowPoint {
                window,
                profit: trace.profit(),
                wall_time_s: trace.wall_time,
            })
        })
        .collect()
}

/// Runs [`window_sweep`] and writes `window_sweep_<method>.csv`.
pub fn emit_window_sweep(
    cfg: &ExperimentConfig,
    method: Method,
    windows: &[usize],
) -> Result<(Vec<WindowPoint>, PathBuf)> {
    let points = window_sweep(cfg, method, windows)?;
    create_dir(&cfg.out_dir)?;
    let path = cfg.out_dir.join(format!("window_sweep_{method}.csv"));
    write_window_sweep_csv(&path, &points)?;
    Ok((points, path))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaPoint {
    pub gamma_frac: f64,
    pub profit: f64,
    /// Worst-case cost of the first full-horizon plan.
    pub robust_objective: f64,
    pub wall_time_s: f64,
}

/// Rolling robust profit on the first configured day for each budget
/// fraction, with the configured deviation and the predictor of the first
/// robust method (or the experiment-wide one).
pub fn gamma_sweep(cfg: &ExperimentConfig, gammas: &[f64]) -> Result<Vec<GammaPoint>> {
    cfg.consumer.validate()?;
    let predictor = cfg
        .methods
        .iter()
        .find(|m| m.kind == MethodKind::Robust)
        .and_then(|m| cfg.predictor_for(m))
        .or(cfg.predictor.as_ref())
        .ok_or_else(|| Error::input("gamma sweeps need a predictor for the nominal prices"))?;
    let day = cfg.day(0)?;
    let predictor = predictor_for_day(predictor, &day);
    let grid = cfg.robust.grid();
    let x0 = cfg.x0();
    let nominal = predictor.forecast(&day.prices, 1, cfg.consumer.horizon)?;
    gammas
        .iter()
        .map(|&gamma_frac| {
            let spec = crate::offline::RobustSpec {
                gamma_frac,
                ..cfg.robust.spec()
            };
            spec.validate()?;
            let first = robust_inner(&cfg.consumer, &nominal.values, &spec, &grid, x0, 1e-6)?;
            let trace = run_rolling_robust(&cfg.consumer, &day.prices, &predictor, &spec, &grid, x0)
                .map_err(|e| e.context(format!("gamma_frac = {gamma_frac}")))?;
            Ok(GammaPoint {
                gamma_frac,
                profit: trace.profit(),
                robust_objective: first.objective,
                wall_time_s: trace.wall_time,
            })
        })
        .collect()
}

/// Runs [`gamma_sweep`] and writes `gamma_sweep.csv`.
pub fn emit_gamma_sweep(cfg: &ExperimentConfig, gammas: &[f64]) -> Result<(Vec<GammaPoint>, PathBuf)> {
    let points = gamma_sweep(cfg, gammas)?;
    create_dir(&cfg.out_dir)?;
    let path = cfg.out_dir.join("gamma_sweep.csv");
    write_gamma_sweep_csv(&path, &points)?;
    Ok((points, path))
}
