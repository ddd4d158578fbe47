//! CSV writers. Numbers are written with the shortest representation that
//! parses back to the same value, so files are exact and deterministic.

use std::path::Path;

use super::suite::{GammaPoint, SummaryRow, WindowPoint};
use crate::error::{Error, Result};
use crate::online::RunTrace;

pub const TRACE_HEADER: &str = "interval,x,delta,lambda,stage_cost,cum_cost";
pub const SUMMARY_HEADER: &str = "method,mean_profit,mean_ratio_pct,mean_shortfall_mwh,mean_wall_time_s";
pub const WINDOW_SWEEP_HEADER: &str = "W,profit,wall_time_s";
pub const GAMMA_SWEEP_HEADER: &str = "gamma_frac,profit,robust_objective,wall_time_s";

fn write_rows(path: &Path, header: &str, rows: impl Iterator<Item = String>) -> Result<()> {
    let mut out = String::with_capacity(4096);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// One row per interval, 0-based like the price files.
pub fn write_trace_csv(path: &Path, trace: &RunTrace) -> Result<()> {
    let x = trace.committed.values();
    write_rows(
        path,
        TRACE_HEADER,
        (0..x.len()).map(|i| {
            format!(
                "{i},{},{},{},{},{}",
                x[i], trace.deltas[i], trace.prices[i], trace.per_stage_cost[i], trace.cumulative_cost[i]
            )
        }),
    )
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    write_rows(
        path,
        SUMMARY_HEADER,
        rows.iter().map(|r| {
            format!(
                "{},{},{},{},{}",
                r.method, r.mean_profit, r.mean_ratio_pct, r.mean_shortfall_mwh, r.mean_wall_time_s
            )
        }),
    )
}

pub fn write_window_sweep_csv(path: &Path, points: &[WindowPoint]) -> Result<()> {
    write_rows(
        path,
        WINDOW_SWEEP_HEADER,
        points
            .iter()
            .map(|p| format!("{},{},{}", p.window, p.profit, p.wall_time_s)),
    )
}

pub fn write_gamma_sweep_csv(path: &Path, points: &[GammaPoint]) -> Result<()> {
    write_rows(
        path,
        GAMMA_SWEEP_HEADER,
        points.iter().map(|p| {
            format!(
                "{},{},{},{}",
                p.gamma_frac, p.profit, p.robust_objective, p.wall_time_s
            )
        }),
    )
}
