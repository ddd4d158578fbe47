//! Hindsight benchmarks: the full-information optimum on a consumption grid,
//! an exhaustive oracle for tiny instances, and the rolling robust baseline.

mod chain;
mod robust;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ConsumerConfig, PriceSeries, Trajectory};

use chain::{lagrange_solve, Chain, Workspace, LEVEL_TOL, REQUIREMENT_TOL};
pub use robust::{robust_inner, robust_objective, run_rolling_robust, RobustSolution, RobustSpec};

/// Uniform discretization of `[x_min, x_max]` into `n_levels` points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_levels: usize,
}

impl GridSpec {
    pub fn new(n_levels: usize) -> Result<Self> {
        let g = Self { n_levels };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_levels < 2 {
            return Err(Error::param(format!(
                "grid needs at least 2 levels, got {}",
                self.n_levels
            )));
        }
        Ok(())
    }

    pub fn step(&self, cfg: &ConsumerConfig) -> f64 {
        (cfg.x_max - cfg.x_min) / (self.n_levels - 1) as f64
    }

    pub fn levels(&self, cfg: &ConsumerConfig) -> Vec<f64> {
        Chain::uniform_levels(cfg.x_min, cfg.x_max, self.n_levels)
    }

    fn chain(&self, cfg: &ConsumerConfig, x0: f64) -> Result<Chain> {
        self.validate()?;
        if cfg.x_max <= cfg.x_min {
            return Err(Error::param("grid needs x_max > x_min"));
        }
        Ok(Chain::new(self.levels(cfg), cfg.r_up, cfg.r_dn, x0))
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n_levels: 241 }
    }
}

/// Hindsight solution on the grid with a certified optimality gap.
#[derive(Debug, Clone, PartialEq)]
pub struct OfflineSolution {
    pub cost: f64,
    pub trajectory: Trajectory,
    pub delta_star: f64,
    /// Lower bound on the cost of every feasible trajectory, on or off the grid.
    pub lower_bound: f64,
    /// `cost - lower_bound`.
    pub repair_gap: f64,
}

impl OfflineSolution {
    pub fn profit(&self) -> f64 {
        -self.cost
    }
}

fn check_instance(cfg: &ConsumerConfig, prices: &PriceSeries) -> Result<()> {
    cfg.validate()?;
    prices.check_horizon(cfg)
}

fn stage_table(chain: &Chain, prices: &[f64], u: f64) -> Vec<f64> {
    let mut base = Vec::with_capacity(prices.len() * chain.len());
    for &lambda in prices {
        base.extend(chain.levels.iter().map(|&l| (lambda - u) * l));
    }
    base
}

fn to_trajectory(chain: &Chain, path: &[usize]) -> Result<Trajectory> {
    Trajectory::new(path.iter().map(|&i| chain.levels[i]).collect())
}

/// Exact minimum of `sum_t stage_costs[t][level_t]` over grid trajectories
/// that respect the box and ramp limits, starting from `x0`. Ties resolve
/// toward lower levels.
pub fn dp_ramp_chain(
    stage_costs: &[Vec<f64>],
    cfg: &ConsumerConfig,
    grid: &GridSpec,
    x0: f64,
) -> Result<(f64, Trajectory)> {
    let chain = grid.chain(cfg, x0)?;
    for (t, row) in stage_costs.iter().enumerate() {
        if row.len() != grid.n_levels {
            return Err(Error::input(format!(
                "stage {} has {} costs for {} levels",
                t + 1,
                row.len(),
                grid.n_levels
            )));
        }
        if row.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numeric(format!("non-finite cost at stage {}", t + 1)));
        }
    }
    let (value, path) = chain
        .solve(stage_costs.len(), |t, i| stage_costs[t][i], &mut Workspace::default())
        .ok_or_else(|| Error::Infeasible(format!("no grid level reachable from {x0}")))?;
    Ok((value, to_trajectory(&chain, &path)?))
}

/// Exhaustive search over every grid trajectory, keeping the cheapest one
/// that meets all constraints including the long-term requirement.
pub fn solve_offline_bruteforce(
    cfg: &ConsumerConfig,
    prices: &PriceSeries,
    grid: &GridSpec,
    x0: f64,
) -> Result<(f64, Trajectory)> {
    check_instance(cfg, prices)?;
    let chain = grid.chain(cfg, x0)?;
    let size = (grid.n_levels as f64).powi(cfg.horizon as i32);
    if size > 1e7 {
        return Err(Error::param(format!(
            "{} levels over {} stages is {size:e} trajectories, above the 1e7 limit",
            grid.n_levels, cfg.horizon
        )));
    }

    struct Search<'a> {
        chain: &'a Chain,
        costs: Vec<f64>,
        n: usize,
        requirement: f64,
        path: Vec<usize>,
        best: Option<(f64, Vec<usize>)>,
    }
    impl Search<'_> {
        fn visit(&mut self, t: usize, prev: f64, cost: f64, energy: f64) {
            if t == self.path.len() {
                if energy >= self.requirement - REQUIREMENT_TOL
                    && self.best.as_ref().is_none_or(|(b, _)| cost < *b)
                {
                    self.best = Some((cost, self.path.clone()));
                }
                return;
            }
            for i in 0..self.n {
                let x = self.chain.levels[i];
                if x - prev > self.chain.r_up + LEVEL_TOL || prev - x > self.chain.r_dn + LEVEL_TOL {
                    continue;
                }
                self.path[t] = i;
                self.visit(t + 1, x, cost + self.costs[t * self.n + i], energy + x);
            }
        }
    }

    let mut search = Search {
        chain: &chain,
        costs: stage_table(&chain, prices.values(), cfg.u),
        n: grid.n_levels,
        requirement: cfg.e_total,
        path: vec![0; cfg.horizon],
        best: None,
    };
    search.visit(0, x0, 0.0, 0.0);
    let (cost, path) = search
        .best
        .ok_or_else(|| Error::Infeasible("no grid trajectory meets every constraint".into()))?;
    Ok((cost, to_trajectory(&chain, &path)?))
}

/// Lagrangian value `delta * E_T + min_x sum_t (lambda_t - u - delta) x_t`
/// over the continuous box-and-ramp polytope. The ramp limits are relaxed to
/// their larger value, which makes the minimum exact on a lattice of vertex
/// values; the result is a lower bound on every feasible cost for any
/// `delta >= 0`.
pub fn continuous_dual_value(
    cfg: &ConsumerConfig,
    prices: &PriceSeries,
    x0: f64,
    delta: f64,
) -> Result<f64> {
    check_instance(cfg, prices)?;
    let chain = lattice_chain(cfg, x0);
    continuous_dual_on(&chain, cfg, prices.values(), delta, &mut Workspace::default())
}

fn lattice_chain(cfg: &ConsumerConfig, x0: f64) -> Chain {
    let range = cfg.x_max - cfg.x_min;
    // a coarser lattice from a larger ramp is still a relaxation
    let r = cfg.r_up.max(cfg.r_dn).max(range / 600.0);
    Chain::new(Chain::lattice_levels(cfg.x_min, cfg.x_max, r, x0), r, r, x0)
}

fn continuous_dual_on(
    chain: &Chain,
    cfg: &ConsumerConfig,
    prices: &[f64],
    delta: f64,
    ws: &mut Workspace,
) -> Result<f64> {
    let (value, _) = chain
        .solve(prices.len(), |t, i| (prices[t] - cfg.u - delta) * chain.levels[i], ws)
        .ok_or_else(|| Error::Infeasible(format!("start {} cannot reach the box", chain.x0)))?;
    Ok(value + delta * cfg.e_total)
}

/// Best continuous dual bound over `delta in [0, delta_hi]` by golden-section
/// search on the concave dual, also trying `extra`.
fn continuous_lower_bound(
    cfg: &ConsumerConfig,
    prices: &[f64],
    x0: f64,
    delta_hi: f64,
    extra: f64,
) -> Result<f64> {
    let chain = lattice_chain(cfg, x0);
    let mut ws = Workspace::default();
    let mut g = |d: f64| continuous_dual_on(&chain, cfg, prices, d, &mut ws);
    let mut best = g(0.0)?.max(g(extra)?).max(g(delta_hi)?);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, delta_hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut gc = g(c)?;
    let mut gd = g(d)?;
    for _ in 0..80 {
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d)?;
        }
        best = best.max(gc).max(gd);
    }
    Ok(best)
}

/// Hindsight optimum on the grid via a bisection on the multiplier of the
/// long-term requirement, with greedy primal repair.
///
/// `tol` is the bisection tolerance on the multiplier. The returned
/// `lower_bound` comes from the continuous dual, so `repair_gap` bounds the
/// distance to the grid optimum and to the continuous optimum alike.
pub fn solve_offline_lagrangian(
    cfg: &ConsumerConfig,
    prices: &PriceSeries,
    grid: &GridSpec,
    x0: f64,
    tol: f64,
) -> Result<OfflineSolution> {
    check_instance(cfg, prices)?;
    if !(tol > 0.0) {
        return Err(Error::param(format!("bisection tolerance must be positive, got {tol}")));
    }
    let chain = grid.chain(cfg, x0)?;
    let base = stage_table(&chain, prices.values(), cfg.u);
    let sol = lagrange_solve(
        &chain,
        &base,
        cfg.horizon,
        cfg.e_total,
        tol,
        None,
        &mut Workspace::default(),
    )?;
    let delta_hi = prices
        .values()
        .iter()
        .map(|&l| (l - cfg.u).max(0.0))
        .fold(0.0, f64::max)
        + 1.0;
    let lower_bound = continuous_lower_bound(cfg, prices.values(), x0, delta_hi, sol.delta)?;
    let lower_bound = lower_bound.min(sol.cost);
    Ok(OfflineSolution {
        cost: sol.cost,
        trajectory: to_trajectory(&chain, &sol.path)?,
        delta_star: sol.delta,
        lower_bound,
        repair_gap: sol.cost - lower_bound,
    })
}
