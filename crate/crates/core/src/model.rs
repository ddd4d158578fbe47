//! The single-consumer demand-response instance: limits, prices, decision
//! trajectories and every loss/gradient the solvers need.
//!
//! Decisions are energies per interval (MWh). Stage loss is the purchase
//! cost minus the consumer's utility, `f_t(x) = lambda_t x - U(x)`, with
//! `U(x) = u x`. The long-term requirement `sum x_t >= E_T` is spread
//! uniformly as `g_t(x) = E_T/T - x` when it is dualized.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oco::Interval;

/// Default absolute tolerance for box/ramp checks.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsumerConfig {
    /// Lower consumption bound per interval (MWh).
    pub x_min: f64,
    /// Upper consumption bound per interval (MWh).
    pub x_max: f64,
    /// Minimum total energy over the horizon (MWh).
    pub e_total: f64,
    /// Largest increase between consecutive intervals (MWh).
    pub r_up: f64,
    /// Largest decrease between consecutive intervals (MWh).
    pub r_dn: f64,
    /// Utility rate ($/MWh).
    pub u: f64,
    pub horizon: usize,
    pub interval_hours: f64,
}

impl ConsumerConfig {
    /// The industrial consumer used throughout the benchmarks: 0.041-0.834
    /// MWh per 5-minute interval, 60 MWh per day, 2 MW/h ramps and a
    /// utility of 69.6 $/MWh over 288 intervals.
    pub fn reference_consumer() -> Self {
        let interval_hours = 1.0 / 12.0;
        Self {
            x_min: 0.041,
            x_max: 0.834,
            e_total: 60.0,
            r_up: ramp_per_interval(2.0, interval_hours),
            r_dn: ramp_per_interval(2.0, interval_hours),
            u: 69.6,
            horizon: 288,
            interval_hours,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.x_min,
            self.x_max,
            self.e_total,
            self.r_up,
            self.r_dn,
            self.u,
            self.interval_hours,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::param("consumer config has non-finite values"));
        }
        if !(0.0 <= self.x_min && self.x_min <= self.x_max) {
            return Err(Error::param(format!(
                "need 0 <= x_min <= x_max, got [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        if !(self.r_up > 0.0 && self.r_dn > 0.0) {
            return Err(Error::param("ramp limits must be positive"));
        }
        if self.horizon == 0 {
            return Err(Error::param("horizon must be at least one interval"));
        }
        if !(self.interval_hours > 0.0) {
            return Err(Error::param("interval_hours must be positive"));
        }
        let t = self.horizon as f64;
        if self.e_total < t * self.x_min - 1e-12 || self.e_total > t * self.x_max + 1e-12 {
            return Err(Error::param(format!(
                "e_total {} outside [T*x_min, T*x_max] = [{}, {}]",
                self.e_total,
                t * self.x_min,
                t * self.x_max
            )));
        }
        Ok(())
    }

    /// The box `[x_min, x_max]`.
    pub fn bounds(&self) -> Interval {
        Interval::new(self.x_min, self.x_max).expect("validated config")
    }

    /// Per-interval share of the long-term requirement, `E_T / T`.
    pub fn pace(&self) -> f64 {
        self.e_total / self.horizon as f64
    }

    /// On-pace starting consumption clamped into the box.
    pub fn default_x0(&self) -> f64 {
        self.pace().clamp(self.x_min, self.x_max)
    }

    /// Largest energy that can still be consumed over `remaining` intervals
    /// when the last commitment was `x_prev` (climbing at full ramp).
    pub fn max_reachable(&self, x_prev: f64, remaining: usize) -> f64 {
        let mut x = x_prev;
        let mut total = 0.0;
        for _ in 0..remaining {
            x = (x + self.r_up).min(self.x_max);
            total += x;
        }
        total
    }
}

/// Converts a ramp rate (MW/h) into the per-interval energy change (MWh).
pub fn ramp_per_interval(rate_mw_per_h: f64, interval_hours: f64) -> f64 {
    rate_mw_per_h * interval_hours
}

/// Utility of consuming `x`. Only the linear form ships; the trait lets a
/// concave utility slot into [`stage_loss_with`].
pub trait Utility {
    fn value(&self, x: f64) -> f64;
    fn marginal(&self, x: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearUtility(pub f64);

impl Utility for LinearUtility {
    fn value(&self, x: f64) -> f64 {
        self.0 * x
    }

    fn marginal(&self, _x: f64) -> f64 {
        self.0
    }
}

/// Ordered per-interval prices in $/MWh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries(Vec<f64>);

impl PriceSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::data(None, format!("price at interval {i} is not finite")));
        }
        Ok(Self(values))
    }

    pub fn check_horizon(&self, cfg: &ConsumerConfig) -> Result<()> {
        if self.0.len() != cfg.horizon {
            return Err(Error::data(
                None,
                format!(
                    "price series has {} intervals, horizon is {}",
                    self.0.len(),
                    cfg.horizon
                ),
            ));
        }
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// A decision sequence `x_1..x_T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory(Vec<f64>);

impl Trajectory {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("trajectory contains non-finite entries"));
        }
        Ok(Self(x))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total_energy(&self) -> f64 {
        self.0.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub box_violations: usize,
    pub ramp_violations: usize,
    /// `max(0, E_T - sum x_t)` in MWh.
    pub long_term_shortfall: f64,
    pub feasible: bool,
}

/// `f_t(x) = (lambda - u) x`; profit is its negation.
#[inline]
pub fn stage_loss(lambda: f64, cfg: &ConsumerConfig, x: f64) -> f64 {
    (lambda - cfg.u) * x
}

pub fn stage_loss_with(lambda: f64, utility: &impl Utility, x: f64) -> f64 {
    lambda * x - utility.value(x)
}

/// Augmented loss `F_t(x, d) = f_t(x) + d (E_T/T - x) - gamma d^2 / 2`.
pub fn augmented_loss(lambda: f64, cfg: &ConsumerConfig, x: f64, delta: f64, gamma: f64) -> f64 {
    stage_loss(lambda, cfg, x) + delta * (cfg.pace() - x) - 0.5 * gamma * delta * delta
}

/// `dF_t/dx = lambda - u - delta` (independent of x for linear utility).
#[inline]
pub fn grad_x_augmented(lambda: f64, cfg: &ConsumerConfig, delta: f64) -> f64 {
    lambda - cfg.u - delta
}

/// `dF_t/d delta = E_T/T - x - gamma delta`.
#[inline]
pub fn grad_delta_augmented(x: f64, delta: f64, cfg: &ConsumerConfig, gamma: f64) -> f64 {
    cfg.pace() - x - gamma * delta
}

/// Smoothed stage loss: `F_t` plus `rho/2 (x - x_prev)^2`.
pub fn smoothed_loss(
    lambda: f64,
    cfg: &ConsumerConfig,
    x_prev: f64,
    x: f64,
    delta: f64,
    gamma: f64,
    rho: f64,
) -> f64 {
    let d = x - x_prev;
    augmented_loss(lambda, cfg, x, delta, gamma) + 0.5 * rho * d * d
}

/// Partial derivative of the summed smoothed loss with respect to `x_cur`.
///
/// Interior stages see both neighbours; the final stage has no successor
/// and `x_next` is ignored.
#[allow(clippy::too_many_arguments)]
#[inline]
pub fn grad_smoothed(
    lambda: f64,
    cfg: &ConsumerConfig,
    delta: f64,
    x_prev: f64,
    x_cur: f64,
    x_next: f64,
    rho: f64,
    is_last_stage: bool,
) -> f64 {
    let coupling = if is_last_stage {
        x_cur - x_prev
    } else {
        2.0 * x_cur - x_prev - x_next
    };
    grad_x_augmented(lambda, cfg, delta) + rho * coupling
}

/// Feasible set for the next decision: the box intersected with the ramp
/// window around `x_prev`.
pub fn ramp_set(x_prev: f64, cfg: &ConsumerConfig) -> Result<Interval> {
    let lo = cfg.x_min.max(x_prev - cfg.r_dn);
    let hi = cfg.x_max.min(x_prev + cfg.r_up);
    if lo > hi {
        return Err(Error::Infeasible(format!(
            "ramp window around {x_prev} does not meet [{}, {}]",
            cfg.x_min, cfg.x_max
        )));
    }
    Interval::new(lo, hi)
}

pub fn feasibility_report(
    traj: &Trajectory,
    cfg: &ConsumerConfig,
    x0: f64,
    tol: f64,
) -> Result<FeasibilityReport> {
    if traj.len() != cfg.horizon {
        return Err(Error::input(format!(
            "trajectory has {} entries, horizon is {}",
            traj.len(),
            cfg.horizon
        )));
    }
    let x = traj.values();
    let box_violations = x
        .iter()
        .filter(|&&v| v < cfg.x_min - tol || v > cfg.x_max + tol)
        .count();
    let ramp_violations = std::iter::once(x0)
        .chain(x.iter().copied())
        .zip(x.iter().copied())
        .filter(|&(prev, cur)| cur - prev > cfg.r_up + tol || prev - cur > cfg.r_dn + tol)
        .count();
    let long_term_shortfall = (cfg.e_total - traj.total_energy()).max(0.0);
    Ok(FeasibilityReport {
        box_violations,
        ramp_violations,
        long_term_shortfall,
        feasible: box_violations == 0 && ramp_violations == 0 && long_term_shortfall <= tol,
    })
}

/// Accumulated stage loss of `traj` under `prices`.
pub fn total_cost(traj: &Trajectory, prices: &PriceSeries, cfg: &ConsumerConfig) -> Result<f64> {
    if traj.len() != prices.len() {
        return Err(Error::input(format!(
            "trajectory length {} != price length {}",
            traj.len(),
            prices.len()
        )));
    }
    Ok(traj
        .values()
        .iter()
        .zip(prices.values())
        .map(|(&x, &lambda)| stage_loss(lambda, cfg, x))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oco::check_gradient;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> ConsumerConfig {
        ConsumerConfig::reference_consumer()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn reference_consumer_is_valid() {
        let c = cfg();
        c.validate().unwrap();
        assert!(close(c.r_up, 0.166_666_666_666_666_66, 1e-15));
        assert!(close(c.pace(), 60.0 / 288.0, 1e-15));
    }

    #[test]
    fn validate_rejects_bad_configs() {
        let mut c = cfg();
        c.x_min = 0.9;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.r_dn = 0.0;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.horizon = 0;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.e_total = 300.0;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.e_total = 1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn stage_loss_examples() {
        let c = cfg();
        assert_eq!(stage_loss(69.6, &c, 0.5), 0.0);
        assert!(close(stage_loss(50.0, &c, 0.834), -16.3464, 1e-12));
        assert!(close(stage_loss(100.0, &c, 0.041), 1.2464, 1e-12));
        assert!(close(
            stage_loss_with(50.0, &LinearUtility(c.u), 0.834),
            stage_loss(50.0, &c, 0.834),
            1e-12
        ));
    }

    #[test]
    fn augmented_gradient_examples() {
        let c = cfg();
        assert_eq!(grad_x_augmented(69.6, &c, 0.0), 0.0);
        assert!(close(grad_x_augmented(80.0, &c, 5.0), 5.4, 1e-12));
        assert!(close(grad_x_augmented(60.0, &c, 0.0), -9.6, 1e-12));

        assert_eq!(grad_delta_augmented(60.0 / 288.0, 7.0, &c, 0.0), 0.0);
        assert!(close(
            grad_delta_augmented(0.041, 1.0, &c, 0.1),
            60.0 / 288.0 - 0.041 - 0.1,
            1e-15
        ));
        assert!(close(grad_delta_augmented(0.041, 1.0, &c, 0.1), 0.067_333, 1e-5));
        assert!(grad_delta_augmented(0.5, 0.0, &c, 0.3) < 0.0);
    }

    #[test]
    fn smoothed_gradient_examples() {
        let c = cfg();
        let plain = grad_x_augmented(75.0, &c, 1.5);
        for rho in [0.0, 2.0, 40.0] {
            assert_eq!(grad_smoothed(75.0, &c, 1.5, 0.3, 0.3, 0.3, rho, false), plain);
            assert_eq!(grad_smoothed(75.0, &c, 1.5, 0.3, 0.3, 9.0, rho, true), plain);
        }
        assert!(close(grad_smoothed(69.6, &c, 0.0, 0.1, 0.2, 0.1, 2.0, false), 0.4, 1e-12));
        assert!(close(grad_smoothed(69.6, &c, 0.0, 0.1, 0.3, 123.0, 2.0, true), 0.4, 1e-12));
    }

    #[test]
    fn ramp_set_examples() {
        let c = cfg();
        let b = ramp_set(0.4, &c).unwrap();
        assert!(close(b.lo(), 0.2333, 1e-4) && close(b.hi(), 0.5667, 1e-4));
        let b = ramp_set(0.041, &c).unwrap();
        assert!(close(b.lo(), 0.041, 1e-12) && close(b.hi(), 0.2077, 1e-4));
        let b = ramp_set(0.834, &c).unwrap();
        assert!(close(b.lo(), 0.6673, 1e-4) && close(b.hi(), 0.834, 1e-12));
        assert!(matches!(ramp_set(2.0, &c), Err(Error::Infeasible(_))));
    }

    #[test]
    fn feasibility_examples() {
        let c = cfg();
        let pace = c.pace();
        let flat = Trajectory::new(vec![pace; c.horizon]).unwrap();
        let r = feasibility_report(&flat, &c, pace, FEASIBILITY_TOL).unwrap();
        assert!(r.feasible, "{r:?}");
        assert_eq!(r.long_term_shortfall, 0.0);

        let mut jump = vec![0.3; c.horizon];
        for v in jump.iter_mut().skip(100) {
            *v = 0.3 + c.r_up + 0.01;
        }
        let r = feasibility_report(&Trajectory::new(jump).unwrap(), &c, 0.3, FEASIBILITY_TOL)
            .unwrap();
        assert_eq!(r.ramp_violations, 1);
        assert_eq!(r.box_violations, 0);

        let floor = Trajectory::new(vec![c.x_min; c.horizon]).unwrap();
        let r = feasibility_report(&floor, &c, c.x_min, FEASIBILITY_TOL).unwrap();
        assert!(close(r.long_term_shortfall, 60.0 - 288.0 * 0.041, 1e-9));
        assert!(!r.feasible);

        // ramp from x0 counts at t = 1
        let mut start = vec![c.x_max; c.horizon];
        start[0] = c.x_max;
        let r = feasibility_report(&Trajectory::new(start).unwrap(), &c, c.x_min, 1e-9).unwrap();
        assert_eq!(r.ramp_violations, 1);

        let short = Trajectory::new(vec![0.2; 3]).unwrap();
        assert!(matches!(
            feasibility_report(&short, &c, 0.2, 1e-9),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn total_cost_examples() {
        let c = cfg();
        let p = PriceSeries::new(vec![c.u; 5]).unwrap();
        let x = Trajectory::new(vec![0.1, 0.7, 0.3, 0.05, 0.8]).unwrap();
        assert_eq!(total_cost(&x, &p, &c).unwrap(), 0.0);

        let p = PriceSeries::new(vec![50.0]).unwrap();
        let x = Trajectory::new(vec![1.0]).unwrap();
        assert!(close(total_cost(&x, &p, &c).unwrap(), -19.6, 1e-12));

        let p = PriceSeries::new(vec![50.0, 70.0, 90.0]).unwrap();
        let x = Trajectory::new(vec![0.8, 0.2, 0.1]).unwrap();
        assert!(close(total_cost(&x, &p, &c).unwrap(), -13.56, 1e-12));

        let x = Trajectory::new(vec![0.8, 0.2]).unwrap();
        assert!(total_cost(&x, &p, &c).is_err());
    }

    #[test]
    fn total_cost_is_linear() {
        let c = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = PriceSeries::new((0..20).map(|_| rng.random_range(20.0..120.0)).collect()).unwrap();
        let a: Vec<f64> = (0..20).map(|_| rng.random_range(0.0..1.0)).collect();
        let b: Vec<f64> = (0..20).map(|_| rng.random_range(0.0..1.0)).collect();
        let (wa, wb) = (1.7, -0.4);
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| wa * x + wb * y).collect();
        let cost = |v: Vec<f64>| total_cost(&Trajectory::new(v).unwrap(), &p, &c).unwrap();
        let lhs = cost(mix);
        let rhs = wa * cost(a) + wb * cost(b);
        assert!(close(lhs, rhs, 1e-9 * rhs.abs().max(1.0)));
    }

    #[test]
    fn non_finite_prices_are_rejected() {
        assert!(matches!(
            PriceSeries::new(vec![1.0, f64::NAN]),
            Err(Error::Data { .. })
        ));
        let c = cfg();
        assert!(PriceSeries::new(vec![1.0; 10]).unwrap().check_horizon(&c).is_err());
    }

    #[test]
    fn max_reachable_climbs_then_saturates() {
        let c = cfg();
        assert_eq!(c.max_reachable(0.3, 0), 0.0);
        let r = c.r_up;
        let expected = (0.3 + r) + (0.3 + 2.0 * r) + (0.3 + 3.0 * r) + c.x_max + c.x_max;
        assert!(close(c.max_reachable(0.3, 5), expected, 1e-12));
    }

    // Finite-difference checks against scalar losses written out here, not
    // through the library's loss helpers.
    #[test]
    fn augmented_gradients_match_finite_differences() {
        let c = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let lambda = rng.random_range(0.0..200.0);
            let x = rng.random_range(c.x_min..c.x_max);
            let delta = rng.random_range(0.0..50.0);
            let gamma = rng.random_range(0.0..2.0);
            let f = |x: f64, d: f64| {
                lambda * x - c.u * x + d * (c.e_total / c.horizon as f64 - x) - gamma * d * d / 2.0
            };
            let ex = check_gradient(|v| f(v, delta), grad_x_augmented(lambda, &c, delta), x, 1e-5)
                .unwrap();
            let ed = check_gradient(
                |d| f(x, d),
                grad_delta_augmented(x, delta, &c, gamma),
                delta,
                1e-5,
            )
            .unwrap();
            assert!(ex <= 1e-6 && ed <= 1e-6, "{ex} {ed}");
        }
    }

    #[test]
    fn smoothed_gradient_matches_finite_differences_of_the_sum() {
        let c = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 5;
        for _ in 0..100 {
            let lambda: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..200.0)).collect();
            let delta: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..30.0)).collect();
            let x0 = rng.random_range(c.x_min..c.x_max);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(c.x_min..c.x_max)).collect();
            let rho = rng.random_range(0.0..100.0);
            let gamma = rng.random_range(0.0..1.0);
            let total = |x: &[f64]| {
                let mut prev = x0;
                let mut s = 0.0;
                for t in 0..n {
                    s += (lambda[t] - c.u) * x[t]
                        + rho / 2.0 * (x[t] - prev).powi(2)
                        + delta[t] * (c.pace() - x[t])
                        - gamma * delta[t].powi(2) / 2.0;
                    prev = x[t];
                }
                s
            };
            for t in 0..n {
                let prev = if t == 0 { x0 } else { x[t - 1] };
                let next = if t + 1 < n { x[t + 1] } else { f64::NAN };
                let g = grad_smoothed(lambda[t], &c, delta[t], prev, x[t], next, rho, t + 1 == n);
                let err = check_gradient(
                    |v| {
                        let mut y = x.clone();
                        y[t] = v;
                        total(&y)
                    },
                    g,
                    x[t],
                    1e-5,
                )
                .unwrap();
                assert!(err <= 1e-6, "stage {t}: {err}");
            }
        }
    }
}
