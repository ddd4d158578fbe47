use crate::error::{Error, Result};
use crate::model::{grad_delta_augmented, grad_x_augmented, ramp_set, ConsumerConfig};
use crate::oco::{project_interval, Interval};

use super::HyperParams;

/// One primal-dual step using only the previous stage's revealed price.
///
/// The primal iterate moves against the augmented-loss gradient and is
/// projected onto the ramp window around `x_prev`; the multiplier moves
/// along it and is projected onto `[0, inf)`. Both gradients are evaluated
/// at the previous iterate.
pub fn step_no_prediction(
    x_prev: f64,
    delta_prev: f64,
    lambda_prev: f64,
    cfg: &ConsumerConfig,
    hp: &HyperParams,
) -> Result<(f64, f64)> {
    if !(delta_prev >= 0.0) {
        return Err(Error::param(format!("multiplier must be >= 0, got {delta_prev}")));
    }
    let feasible = ramp_set(x_prev, cfg)?;
    let x = project_interval(
        x_prev - hp.eta * grad_x_augmented(lambda_prev, cfg, delta_prev),
        feasible,
    );
    let delta = project_interval(
        delta_prev + hp.mu * grad_delta_augmented(x_prev, delta_prev, cfg, hp.gamma),
        Interval::nonnegative(),
    );
    Ok((x, delta))
}
