//! Receding-horizon gradient (RHGD) and accelerated-gradient (RHAG)
//! steppers.
//!
//! Every round `t` keeps provisional decisions `x^s_m` for the stages
//! `m = t..=t+W`. A round initializes the new tail stage `t+W` with one
//! projected step from the previous round's tail, then walks backwards from
//! `t+W-1` to `t`, moving each provisional decision one step along the
//! coupled gradient of the smoothed loss. Only the rounds `t-1` and `t-2`
//! are read, so the matrix holds three rows at most.
//!
//! Rounds and stages are 1-based; round 0 and stage 0 are the pre-history,
//! filled with `x0` and a zero multiplier.

use crate::error::{Error, Result};
use crate::model::{grad_delta_augmented, grad_smoothed, grad_x_augmented, ramp_set, ConsumerConfig};
use crate::oco::{project_interval, xi_from, Interval};

use super::HyperParams;

#[derive(Debug, Clone, PartialEq)]
struct Row {
    /// 0 marks the pre-history row.
    round: usize,
    first: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    delta: Vec<f64>,
}

impl Row {
    fn prehistory() -> Self {
        Self {
            round: 0,
            first: 0,
            x: Vec::new(),
            y: Vec::new(),
            delta: Vec::new(),
        }
    }

    fn slot(&self, m: usize) -> Option<usize> {
        if self.round == 0 || m == 0 {
            return None;
        }
        let i = m
            .checked_sub(self.first)
            .filter(|&i| i < self.x.len())
            .unwrap_or_else(|| {
                panic!(
                    "stage {m} not held by round {} (stages {}..{})",
                    self.round,
                    self.first,
                    self.first + self.x.len()
                )
            });
        Some(i)
    }
}

/// Sliding working set of provisional decisions `x^s_m`, momentum
/// iterates `y^s_m` and multipliers `delta^s_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionMatrix {
    x0: f64,
    window: usize,
    /// Round `t-1` once `t` is being computed.
    last: Row,
    /// Round `t-2`.
    before_last: Row,
}

impl DecisionMatrix {
    pub fn new(x0: f64, window: usize) -> Self {
        Self {
            x0,
            window,
            last: Row::prehistory(),
            before_last: Row::prehistory(),
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Next round to be computed.
    pub fn next_round(&self) -> usize {
        self.last.round + 1
    }

    fn x(&self, row: &Row, m: usize) -> f64 {
        row.slot(m).map_or(self.x0, |i| row.x[i])
    }

    fn y(&self, row: &Row, m: usize) -> f64 {
        row.slot(m).map_or(self.x0, |i| row.y[i])
    }

    fn delta(&self, row: &Row, m: usize) -> f64 {
        row.slot(m).map_or(0.0, |i| row.delta[i])
    }

    /// Provisional decisions of the most recent round, with their first stage.
    pub fn latest(&self) -> (usize, &[f64]) {
        (self.last.first, &self.last.x)
    }

    /// Provisional multipliers of the most recent round.
    pub fn latest_deltas(&self) -> &[f64] {
        &self.last.delta
    }

    /// Runs one round and returns the committed `(x_t, delta_t)`.
    ///
    /// `forecast` holds the prices of stages `t..` (at least
    /// `min(W, T - t + 1)` of them); `committed_prev` is the decision
    /// committed at `t - 1` (or `x0`), which defines the ramp window.
    fn advance(
        &mut self,
        forecast: &[f64],
        committed_prev: f64,
        cfg: &ConsumerConfig,
        hp: &HyperParams,
        xi: f64,
    ) -> Result<(f64, f64)> {
        let w = self.window;
        if w == 0 {
            return Err(Error::param(
                "receding-horizon step needs a window of at least 1; use the no-prediction step",
            ));
        }
        let t = self.next_round();
        let horizon = cfg.horizon;
        if t > horizon {
            return Err(Error::input(format!("round {t} beyond horizon {horizon}")));
        }
        let steps = w.min(horizon - t + 1);
        if forecast.len() < steps {
            return Err(Error::input(format!(
                "forecast covers {} stages, round {t} needs {steps}",
                forecast.len()
            )));
        }
        let accelerated = xi != 0.0;
        let bounds = cfg.bounds();
        let nonneg = Interval::nonnegative();
        let tail = (t + w).min(horizon);
        let len = tail - t + 1;
        let mut cur = Row {
            round: t,
            first: t,
            x: vec![0.0; len],
            y: vec![0.0; len],
            delta: vec![0.0; len],
        };

        // tail initialization from the previous round's tail
        if t + w <= horizon {
            let m = t + w - 1;
            let x_src = self.x(&self.last, m);
            let d_src = self.delta(&self.last, m);
            let price = forecast[w - 1];
            let x_new = project_interval(x_src - hp.eta1 * grad_x_augmented(price, cfg, d_src), bounds);
            let d_new = project_interval(
                d_src + hp.mu1 * grad_delta_augmented(x_src, d_src, cfg, hp.gamma),
                nonneg,
            );
            let i = len - 1;
            cur.x[i] = x_new;
            cur.y[i] = x_new;
            cur.delta[i] = d_new;
        }

        // backward pass over stages t+steps-1 ..= t
        for m in (t..t + steps).rev() {
            let i = m - t;
            let is_last = m == horizon;
            let price = forecast[i];
            let d_prev = self.delta(&self.last, m);
            let x_prev_round = self.x(&self.last, m);
            let (left, centre, right) = if accelerated {
                (
                    self.y(&self.before_last, m - 1),
                    self.y(&self.last, m),
                    if is_last { f64::NAN } else { cur.y[i + 1] },
                )
            } else {
                (
                    self.x(&self.before_last, m - 1),
                    x_prev_round,
                    if is_last { f64::NAN } else { cur.x[i + 1] },
                )
            };
            let h = grad_smoothed(price, cfg, d_prev, left, centre, right, hp.rho, is_last);
            let x_new = project_interval(centre - hp.eta2 * h, bounds);
            cur.x[i] = x_new;
            cur.y[i] = if accelerated {
                x_new + xi * (x_new - x_prev_round)
            } else {
                x_new
            };
            cur.delta[i] = project_interval(
                d_prev + hp.mu2 * grad_delta_augmented(x_prev_round, d_prev, cfg, hp.gamma),
                nonneg,
            );
        }

        let feasible = ramp_set(committed_prev, cfg)?;
        let committed = project_interval(cur.x[0], feasible);
        let delta = cur.delta[0];
        self.before_last = std::mem::replace(&mut self.last, cur);
        Ok((committed, delta))
    }
}

/// One RHGD round. See [`DecisionMatrix`] for the update order.
pub fn rhgd_step(
    state: &mut DecisionMatrix,
    forecast: &[f64],
    committed_prev: f64,
    cfg: &ConsumerConfig,
    hp: &HyperParams,
) -> Result<(f64, f64)> {
    state.advance(forecast, committed_prev, cfg, hp, 0.0)
}

/// One RHAG round: as [`rhgd_step`], but gradients are taken at the
/// momentum iterates `y = (1 + xi) x^t - xi x^{t-1}` with
/// `xi = xi_from(zeta, eta2)`.
pub fn rhag_step(
    state: &mut DecisionMatrix,
    forecast: &[f64],
    committed_prev: f64,
    cfg: &ConsumerConfig,
    hp: &HyperParams,
) -> Result<(f64, f64)> {
    let xi = xi_from(hp.zeta, hp.eta2)?;
    state.advance(forecast, committed_prev, cfg, hp, xi)
}
