//! Online decision makers and the stage-by-stage run loop.
//!
//! At every stage the runner asks the chosen stepper for a commitment using
//! only prices revealed at earlier stages (plus forecasts when the method
//! looks ahead), then reveals the stage price and books the stage loss.

mod no_prediction;
mod receding;
pub mod smoothed;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::Predictor;
use crate::model::{
    feasibility_report, ramp_set, stage_loss, ConsumerConfig, FeasibilityReport, PriceSeries,
    Trajectory, FEASIBILITY_TOL,
};
use crate::oco::xi_from;

pub use no_prediction::step_no_prediction;
pub use receding::{rhag_step, rhgd_step, DecisionMatrix};

/// Step sizes and regularizers for all three online methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperParams {
    /// Primal step of the no-prediction method.
    pub eta: f64,
    /// Dual step of the no-prediction method.
    pub mu: f64,
    /// Primal step for the tail initialization (receding horizon).
    pub eta1: f64,
    /// Dual step for the tail initialization.
    pub mu1: f64,
    /// Primal step of each backward update.
    pub eta2: f64,
    /// Dual step of each backward update.
    pub mu2: f64,
    /// Multiplier regularizer.
    pub gamma: f64,
    /// Weight of the squared difference between consecutive decisions.
    pub rho: f64,
    /// Strong-convexity estimate used for the momentum coefficient.
    pub zeta: f64,
    /// Look-ahead window W.
    pub window: usize,
    /// Force full ramp-up once the remaining requirement can only just be met.
    pub hard_finish: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            eta: 0.26,
            mu: 2.0,
            eta1: 0.26,
            mu1: 2.0,
            eta2: 0.02,
            mu2: 2.0,
            gamma: 0.001,
            rho: 10.0,
            zeta: 10.0,
            window: 6,
            hard_finish: false,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eta", self.eta),
            ("mu", self.mu),
            ("eta1", self.eta1),
            ("mu1", self.mu1),
            ("eta2", self.eta2),
            ("mu2", self.mu2),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(format!("step size {name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("gamma", self.gamma), ("rho", self.rho), ("zeta", self.zeta)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::param(format!("{name} must be >= 0, got {v}")));
            }
        }
        xi_from(self.zeta, self.eta2)?;
        Ok(())
    }

    /// Momentum coefficient of the accelerated stepper.
    pub fn xi(&self) -> Result<f64> {
        xi_from(self.zeta, self.eta2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    NoPrediction,
    Rhgd,
    Rhag,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::NoPrediction => "no_prediction",
            Method::Rhgd => "rhgd",
            Method::Rhag => "rhag",
        }
    }

    pub fn uses_forecasts(&self) -> bool {
        !matches!(self, Method::NoPrediction)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "no_prediction" => Ok(Method::NoPrediction),
            "rhgd" => Ok(Method::Rhgd),
            "rhag" => Ok(Method::Rhag),
            other => Err(Error::param(format!("unknown online method `{other}`"))),
        }
    }
}

/// Everything recorded while running one method over one price day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub committed: Trajectory,
    pub deltas: Vec<f64>,
    pub prices: Vec<f64>,
    pub per_stage_cost: Vec<f64>,
    pub cumulative_cost: Vec<f64>,
    pub report: FeasibilityReport,
    /// Excluded from equality-based determinism checks.
    pub wall_time: f64,
}

impl RunTrace {
    pub fn total_cost(&self) -> f64 {
        self.cumulative_cost.last().copied().unwrap_or(0.0)
    }

    pub fn profit(&self) -> f64 {
        -self.total_cost()
    }

    /// Assembles a trace from committed decisions, booking stage losses in order.
    pub(crate) fn from_commitments(
        x: Vec<f64>,
        deltas: Vec<f64>,
        prices: &PriceSeries,
        cfg: &ConsumerConfig,
        x0: f64,
        wall_time: f64,
    ) -> Result<Self> {
        let per_stage_cost: Vec<f64> = x
            .iter()
            .zip(prices.values())
            .map(|(&x, &lambda)| stage_loss(lambda, cfg, x))
            .collect();
        let cumulative_cost = per_stage_cost
            .iter()
            .scan(0.0, |acc, c| {
                *acc += c;
                Some(*acc)
            })
            .collect();
        let committed = Trajectory::new(x)?;
        let report = feasibility_report(&committed, cfg, x0, FEASIBILITY_TOL)?;
        Ok(Self {
            committed,
            deltas,
            prices: prices.values().to_vec(),
            per_stage_cost,
            cumulative_cost,
            report,
            wall_time,
        })
    }
}

/// Lifts `proposal` to the ramp ceiling when committing it would leave the
/// long-term requirement unreachable over the remaining stages.
pub fn hard_finish_guard(
    proposal: f64,
    x_prev: f64,
    consumed: f64,
    remaining_after: usize,
    cfg: &ConsumerConfig,
) -> Result<f64> {
    let reachable = consumed + proposal + cfg.max_reachable(proposal, remaining_after);
    if reachable >= cfg.e_total {
        return Ok(proposal);
    }
    Ok(ramp_set(x_prev, cfg)?.hi())
}

/// Runs `method` over the whole price series.
///
/// `predictor` is required for the look-ahead methods; the window is
/// `hp.window`. The no-prediction method commits `x0` at the first stage,
/// since no price has been revealed yet.
pub fn run_online(
    method: Method,
    prices: &PriceSeries,
    predictor: Option<&Predictor>,
    cfg: &ConsumerConfig,
    hp: &HyperParams,
    x0: f64,
) -> Result<RunTrace> {
    cfg.validate()?;
    hp.validate()?;
    prices.check_horizon(cfg)?;
    if !cfg.bounds().contains(x0) {
        return Err(Error::param(format!(
            "x0 = {x0} outside [{}, {}]",
            cfg.x_min, cfg.x_max
        )));
    }
    let predictor = match (method.uses_forecasts(), predictor) {
        (true, None) => {
            return Err(Error::input(format!("method {method} needs a predictor")));
        }
        (true, Some(_)) if hp.window == 0 => {
            return Err(Error::param(format!("method {method} needs window >= 1")));
        }
        (_, p) => p,
    };

    let horizon = cfg.horizon;
    let lambda = prices.values();
    let started = Instant::now();
    let mut x = Vec::with_capacity(horizon);
    let mut deltas = Vec::with_capacity(horizon);
    let mut matrix = DecisionMatrix::new(x0, hp.window);
    let (mut x_prev, mut delta_prev) = (x0, 0.0);
    let mut consumed = 0.0;

    for t in 1..=horizon {
        let (mut x_t, delta_t) = match method {
            Method::NoPrediction => {
                if t == 1 {
                    (x0, 0.0)
                } else {
                    step_no_prediction(x_prev, delta_prev, lambda[t - 2], cfg, hp)?
                }
            }
            Method::Rhgd | Method::Rhag => {
                let fc = predictor
                    .expect("checked above")
                    .forecast(prices, t, hp.window)?;
                if method == Method::Rhgd {
                    rhgd_step(&mut matrix, &fc.values, x_prev, cfg, hp)?
                } else {
                    rhag_step(&mut matrix, &fc.values, x_prev, cfg, hp)?
                }
            }
        };
        if hp.hard_finish {
            x_t = hard_finish_guard(x_t, x_prev, consumed, horizon - t, cfg)?;
        }
        consumed += x_t;
        x.push(x_t);
        deltas.push(delta_t);
        x_prev = x_t;
        delta_prev = delta_t;
    }
    let wall = started.elapsed().as_secs_f64();
    RunTrace::from_commitments(x, deltas, prices, cfg, x0, wall)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_day(cfg: &ConsumerConfig, price: f64) -> PriceSeries {
        PriceSeries::new(vec![price; cfg.horizon]).unwrap()
    }

    fn wavy_day(cfg: &ConsumerConfig) -> PriceSeries {
        PriceSeries::new(
            (0..cfg.horizon)
                .map(|i| 72.0 + 20.0 * ((i as f64) / 9.0).sin() + 6.0 * ((i as f64) * 1.7).cos())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn constant_utility_price_keeps_on_pace_trajectory() {
        let cfg = ConsumerConfig::reference_consumer();
        let prices = flat_day(&cfg, cfg.u);
        let x0 = cfg.default_x0();
        for m in [Method::NoPrediction, Method::Rhgd, Method::Rhag] {
            let tr = run_online(m, &prices, Some(&Predictor::Perfect), &cfg, &HyperParams::default(), x0)
                .unwrap();
            assert!(tr.committed.values().iter().all(|&v| v == x0), "{m}");
            assert_eq!(tr.total_cost(), 0.0);
            assert!(tr.deltas.iter().all(|&d| d == 0.0));
        }
    }

    #[test]
    fn single_stage_horizon() {
        let cfg = ConsumerConfig {
            horizon: 1,
            e_total: 0.2,
            ..ConsumerConfig::reference_consumer()
        };
        let prices = flat_day(&cfg, 55.0);
        for m in [Method::NoPrediction, Method::Rhgd, Method::Rhag] {
            let tr = run_online(m, &prices, Some(&Predictor::Perfect), &cfg, &HyperParams::default(), 0.2)
                .unwrap();
            assert_eq!(tr.committed.len(), 1);
            let x1 = tr.committed.values()[0];
            assert_eq!(tr.total_cost(), stage_loss(55.0, &cfg, x1));
        }
    }

    #[test]
    fn commitments_respect_ramps_and_box() {
        let cfg = ConsumerConfig::reference_consumer();
        let prices = wavy_day(&cfg);
        for m in [Method::NoPrediction, Method::Rhgd, Method::Rhag] {
            let tr = run_online(m, &prices, Some(&Predictor::Perfect), &cfg, &HyperParams::default(), 0.2)
                .unwrap();
            assert_eq!(tr.report.box_violations, 0);
            assert_eq!(tr.report.ramp_violations, 0);
            assert!(tr.deltas.iter().all(|&d| d >= 0.0));
            let mut acc = 0.0;
            for (c, cum) in tr.per_stage_cost.iter().zip(&tr.cumulative_cost) {
                acc += c;
                assert_eq!(acc, *cum);
            }
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let cfg = ConsumerConfig::reference_consumer();
        let prices = wavy_day(&cfg);
        let pred = Predictor::Noisy {
            sigma_rel: 0.05,
            seed: 5,
        };
        for m in [Method::NoPrediction, Method::Rhgd, Method::Rhag] {
            let mut a = run_online(m, &prices, Some(&pred), &cfg, &HyperParams::default(), 0.2).unwrap();
            let mut b = run_online(m, &prices, Some(&pred), &cfg, &HyperParams::default(), 0.2).unwrap();
            a.wall_time = 0.0;
            b.wall_time = 0.0;
            assert_eq!(a, b);
        }
    }

    #[test]
    fn lookahead_without_predictor_is_rejected() {
        let cfg = ConsumerConfig::reference_consumer();
        let prices = flat_day(&cfg, 70.0);
        let err = run_online(Method::Rhgd, &prices, None, &cfg, &HyperParams::default(), 0.2);
        assert!(matches!(err, Err(Error::Input(_))));
        let hp = HyperParams {
            window: 0,
            ..HyperParams::default()
        };
        let err = run_online(Method::Rhag, &prices, Some(&Predictor::Perfect), &cfg, &hp, 0.2);
        assert!(matches!(err, Err(Error::Parameter(_))));
        // no-prediction ignores the window
        run_online(Method::NoPrediction, &prices, None, &cfg, &hp, 0.2).unwrap();
    }

    #[test]
    fn wrong_length_prices_are_a_data_error() {
        let cfg = ConsumerConfig::reference_consumer();
        let prices = PriceSeries::new(vec![70.0; 10]).unwrap();
        let err = run_online(Method::NoPrediction, &prices, None, &cfg, &HyperParams::default(), 0.2);
        assert!(matches!(err, Err(Error::Data { .. })));
    }

    #[test]
    fn hard_finish_meets_requirement_on_expensive_day() {
        let cfg = ConsumerConfig::reference_consumer();
        // prices far above utility: the unconstrained instinct is to sit at x_min
        let prices = flat_day(&cfg, 150.0);
        let hp = HyperParams {
            hard_finish: true,
            mu: 1e-6,
            mu1: 1e-6,
            mu2: 1e-6,
            ..HyperParams::default()
        };
        for m in [Method::NoPrediction, Method::Rhgd, Method::Rhag] {
            let tr = run_online(m, &prices, Some(&Predictor::Perfect), &cfg, &hp, 0.2).unwrap();
            assert!(tr.report.long_term_shortfall <= 1e-9, "{m}: {:?}", tr.report);
            assert_eq!(tr.report.ramp_violations, 0);
            let soft = run_online(
                m,
                &prices,
                Some(&Predictor::Perfect),
                &cfg,
                &HyperParams {
                    hard_finish: false,
                    ..hp.clone()
                },
                0.2,
            )
            .unwrap();
            assert!(soft.report.long_term_shortfall > 1.0);
        }
    }

    #[test]
    fn hyperparams_validation() {
        assert!(HyperParams::default().validate().is_ok());
        let bad = HyperParams {
            eta: 0.0,
            ..HyperParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = HyperParams {
            zeta: 100.0,
            eta2: 0.5,
            ..HyperParams::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!("rhag".parse::<Method>().unwrap(), Method::Rhag);
        assert!("foo".parse::<Method>().is_err());
    }
}
