//! Rolling robust baseline: at every stage, re-plan the remaining horizon
//! against a budgeted worst case around a nominal price forecast, then
//! commit only the first decision.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::chain::{lagrange_solve, Workspace};
use super::{stage_table, GridSpec};
use crate::error::{Error, Result};
use crate::forecast::Predictor;
use crate::model::{ramp_set, ConsumerConfig, PriceSeries};
use crate::oco::project_interval;
use crate::online::RunTrace;

/// Multiplier bisection tolerance used by each rolling re-plan.
const ROLLING_DELTA_TOL: f64 = 1e-3;

/// Budgeted uncertainty around a nominal forecast. Each stage's price may
/// rise by up to `dev_frac * |nominal|`; at most `round(gamma_frac * len)`
/// stages deviate at once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustSpec {
    pub gamma_frac: f64,
    pub dev_frac: f64,
}

impl Default for RobustSpec {
    fn default() -> Self {
        Self {
            gamma_frac: 0.3,
            dev_frac: 0.05,
        }
    }
}

impl RobustSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma_frac) {
            return Err(Error::param(format!(
                "gamma_frac must lie in [0, 1], got {}",
                self.gamma_frac
            )));
        }
        if !(self.dev_frac >= 0.0) || !self.dev_frac.is_finite() {
            return Err(Error::param(format!(
                "dev_frac must be finite and nonnegative, got {}",
                self.dev_frac
            )));
        }
        Ok(())
    }

    /// Number of stages allowed to deviate over `len` stages.
    pub fn budget(&self, len: usize) -> usize {
        (self.gamma_frac * len as f64).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustSolution {
    /// Plan for the stages covered by the nominal forecast.
    pub trajectory: Vec<f64>,
    /// Worst-case cost of `trajectory` under the budget.
    pub objective: f64,
    /// Multiplier of the long-term requirement in the final re-plan.
    pub delta: f64,
    pub budget: usize,
}

/// Worst-case cost of `x` when up to `spec.budget(len)` stages take their
/// full upward deviation.
pub fn robust_objective(cfg: &ConsumerConfig, nominal: &[f64], spec: &RobustSpec, x: &[f64]) -> f64 {
    let nominal_cost: f64 = nominal.iter().zip(x).map(|(&l, &v)| (l - cfg.u) * v).sum();
    let mut protection: Vec<f64> = nominal
        .iter()
        .zip(x)
        .map(|(&l, &v)| spec.dev_frac * l.abs() * v)
        .collect();
    protection.sort_by(|a, b| b.total_cmp(a));
    nominal_cost + protection.iter().take(spec.budget(x.len())).sum::<f64>()
}

/// Minimizes the budgeted worst-case cost over grid trajectories for the
/// stages covered by `nominal`, starting from `x0`.
///
/// The requirement is `cfg.e_total`, lowered to the most energy the ramps
/// allow when it is out of reach; `cfg.horizon` is ignored in favour of
/// `nominal.len()`. The worst case over the budget is written as
/// `min_z budget*z + sum_t max(0, d_t x_t - z)`; an outer golden-section
/// search runs over `z` and each inner problem is a multiplier search on
/// the ramp chain. With a zero budget or zero deviation this is the nominal
/// deterministic plan.
pub fn robust_inner(
    cfg: &ConsumerConfig,
    nominal: &[f64],
    spec: &RobustSpec,
    grid: &GridSpec,
    x0: f64,
    tol: f64,
) -> Result<RobustSolution> {
    plan(cfg, nominal, spec, grid, x0, tol, None)
}

/// [`robust_inner`] with a guess of the requirement multiplier.
fn plan(
    cfg: &ConsumerConfig,
    nominal: &[f64],
    spec: &RobustSpec,
    grid: &GridSpec,
    x0: f64,
    tol: f64,
    hint: Option<f64>,
) -> Result<RobustSolution> {
    spec.validate()?;
    if nominal.is_empty() {
        return Err(Error::input("robust plan needs at least one nominal price"));
    }
    if nominal.iter().any(|p| !p.is_finite()) {
        return Err(Error::data(None, "non-finite nominal price"));
    }
    if !(tol > 0.0) {
        return Err(Error::param(format!("bisection tolerance must be positive, got {tol}")));
    }
    let chain = grid.chain(cfg, x0)?;
    let n = chain.len();
    let len = nominal.len();
    let reachable = chain
        .highest_path(len)
        .map(|p| chain.energy(&p))
        .ok_or_else(|| Error::Infeasible(format!("no grid level reachable from {x0}")))?;
    let requirement = cfg.e_total.max(0.0).min(reachable);
    let budget = spec.budget(len);
    let nominal_base = stage_table(&chain, nominal, cfg.u);
    let mut ws = Workspace::default();
    let levels_of = |path: &[usize]| -> Vec<f64> { path.iter().map(|&i| chain.levels[i]).collect() };

    if budget == 0 || spec.dev_frac == 0.0 {
        let sol = lagrange_solve(&chain, &nominal_base, len, requirement, tol, hint, &mut ws)?;
        let trajectory = levels_of(&sol.path);
        return Ok(RobustSolution {
            objective: robust_objective(cfg, nominal, spec, &trajectory),
            trajectory,
            delta: sol.delta,
            budget,
        });
    }

    let dev: Vec<f64> = nominal.iter().map(|&l| spec.dev_frac * l.abs()).collect();
    let mut table = vec![0.0; len * n];
    let mut best: Option<RobustSolution> = None;
    let mut last_delta = hint;
    // Surrogate value budget*z + (inner minimum) at a given z; the exact
    // worst case of each inner plan decides which plan is kept.
    let mut eval = |z: f64, best: &mut Option<RobustSolution>| -> Result<f64> {
        for t in 0..len {
            for i in 0..n {
                table[t * n + i] = nominal_base[t * n + i] + (dev[t] * chain.levels[i] - z).max(0.0);
            }
        }
        let sol = lagrange_solve(&chain, &table, len, requirement, tol, last_delta, &mut ws)?;
        last_delta = Some(sol.delta);
        let trajectory = levels_of(&sol.path);
        let objective = robust_objective(cfg, nominal, spec, &trajectory);
        if best.as_ref().is_none_or(|b| objective < b.objective) {
            *best = Some(RobustSolution {
                trajectory,
                objective,
                delta: sol.delta,
                budget,
            });
        }
        Ok(budget as f64 * z + sol.cost)
    };

    let z_max = dev.iter().fold(0.0, |m: f64, &d| m.max(d * cfg.x_max));
    let price_scale = nominal.iter().fold(1.0, |m: f64, &l| m.max(l.abs()));
    let z_tol = 1e-4 * price_scale * cfg.x_max.max(f64::MIN_POSITIVE);
    eval(0.0, &mut best)?;
    eval(z_max, &mut best)?;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, z_max);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut vc = eval(c, &mut best)?;
    let mut vd = eval(d, &mut best)?;
    while b - a > z_tol {
        if vc <= vd {
            b = d;
            d = c;
            vd = vc;
            c = b - inv_phi * (b - a);
            vc = eval(c, &mut best)?;
        } else {
            a = c;
            c = d;
            vc = vd;
            d = a + inv_phi * (b - a);
            vd = eval(d, &mut best)?;
        }
    }
    best.ok_or_else(|| Error::Numeric("robust search evaluated no plan".into()))
}

/// Re-plans the remaining horizon at every stage with [`robust_inner`] on
/// the predictor's nominal forecast and the requirement left after past
/// consumption, commits the first planned decision (projected onto the ramp
/// window) and then observes the true price.
pub fn run_rolling_robust(
    cfg: &ConsumerConfig,
    prices: &PriceSeries,
    predictor: &Predictor,
    spec: &RobustSpec,
    grid: &GridSpec,
    x0: f64,
) -> Result<RunTrace> {
    cfg.validate()?;
    spec.validate()?;
    grid.validate()?;
    prices.check_horizon(cfg)?;
    let started = Instant::now();
    let horizon = cfg.horizon;
    let mut x = Vec::with_capacity(horizon);
    let mut deltas = Vec::with_capacity(horizon);
    let mut x_prev = x0;
    let mut consumed = 0.0;
    for t in 1..=horizon {
        let remaining = horizon - t + 1;
        let forecast = predictor.forecast(prices, t, remaining)?;
        if forecast.values.len() != remaining {
            return Err(Error::input(format!(
                "predictor returned {} prices for the {remaining} remaining stages",
                forecast.values.len()
            )));
        }
        let sub = ConsumerConfig {
            horizon: remaining,
            e_total: (cfg.e_total - consumed).max(0.0),
            ..cfg.clone()
        };
        let hint = deltas.last().copied();
        let plan = plan(&sub, &forecast.values, spec, grid, x_prev, ROLLING_DELTA_TOL, hint)?;
        let x_t = project_interval(plan.trajectory[0], ramp_set(x_prev, cfg)?);
        consumed += x_t;
        x.push(x_t);
        deltas.push(plan.delta);
        x_prev = x_t;
    }
    let wall = started.elapsed().as_secs_f64();
    RunTrace::from_commitments(x, deltas, prices, cfg, x0, wall)
}
