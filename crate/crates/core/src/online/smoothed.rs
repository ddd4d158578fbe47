//! Full-horizon minimization of the smoothed loss with a fixed multiplier,
//! by projected gradient descent or by projected Nesterov iteration.
//!
//! The objective is
//! `sum_t (lambda_t - u - delta) x_t + rho/2 (x_t - x_{t-1})^2` over the box,
//! with `x_0` fixed. Its Hessian is `rho` times a path Laplacian with one
//! pinned end, so the curvature lies in
//! `[2 rho (1 - cos(pi / (2T + 1))), 4 rho)`.

use crate::error::{Error, Result};
use crate::model::{grad_smoothed, ConsumerConfig, PriceSeries};
use crate::oco::{project_interval, xi_from};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    Gradient,
    /// Constant-momentum Nesterov iteration with the given coefficient,
    /// dropping the momentum whenever it opposes the gradient mapping.
    Nesterov { xi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedProblem<'a> {
    pub prices: &'a PriceSeries,
    pub cfg: &'a ConsumerConfig,
    pub x0: f64,
    pub rho: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Sup-norm of the gradient mapping at `x`.
    pub residual: f64,
}

/// Smallest eigenvalue of the smoothing Hessian over `horizon` stages.
pub fn smoothing_strong_convexity(rho: f64, horizon: usize) -> f64 {
    let theta = std::f64::consts::PI / (2 * horizon + 1) as f64;
    2.0 * rho * (1.0 - theta.cos())
}

/// Upper bound on the smoothing Hessian's largest eigenvalue.
pub fn smoothing_lipschitz(rho: f64) -> f64 {
    4.0 * rho
}

impl SmoothedProblem<'_> {
    pub fn objective(&self, x: &[f64]) -> f64 {
        let u = self.cfg.u;
        let mut prev = self.x0;
        let mut total = 0.0;
        for (&xt, &lambda) in x.iter().zip(self.prices.values()) {
            total += (lambda - u - self.delta) * xt + 0.5 * self.rho * (xt - prev) * (xt - prev);
            prev = xt;
        }
        total
    }

    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let n = x.len();
        let lambda = self.prices.values();
        for t in 0..n {
            let prev = if t == 0 { self.x0 } else { x[t - 1] };
            let next = if t + 1 < n { x[t + 1] } else { f64::NAN };
            out[t] = grad_smoothed(lambda[t], self.cfg, self.delta, prev, x[t], next, self.rho, t + 1 == n);
        }
    }

    fn mapping_residual(&self, x: &[f64], grad: &mut [f64], step: f64) -> f64 {
        self.gradient(x, grad);
        let bounds = self.cfg.bounds();
        x.iter()
            .zip(grad.iter())
            .map(|(&v, &g)| ((v - project_interval(v - step * g, bounds)) / step).abs())
            .fold(0.0, f64::max)
    }

    /// Iterates from the constant trajectory `x0` until the gradient mapping
    /// (step `1/L`) falls below `tol` in sup-norm, or `max_iter` is reached.
    pub fn minimize(&self, scheme: Scheme, tol: f64, max_iter: usize) -> Result<SmoothedSolution> {
        if !(self.rho > 0.0) {
            return Err(Error::param("smoothed minimization needs rho > 0"));
        }
        self.prices.check_horizon(self.cfg)?;
        let n = self.cfg.horizon;
        let step = 1.0 / smoothing_lipschitz(self.rho);
        let bounds = self.cfg.bounds();
        let xi = match scheme {
            Scheme::Gradient => 0.0,
            Scheme::Nesterov { xi } if (0.0..1.0).contains(&xi) => xi,
            Scheme::Nesterov { xi } => {
                return Err(Error::param(format!("momentum {xi} outside [0, 1)")))
            }
        };

        let mut x = vec![project_interval(self.x0, bounds); n];
        let mut x_old = x.clone();
        let mut y = x.clone();
        let mut grad = vec![0.0; n];
        let mut scratch = vec![0.0; n];
        for k in 0..max_iter {
            let residual = self.mapping_residual(&x, &mut scratch, step);
            if residual <= tol {
                return Ok(SmoothedSolution {
                    x,
                    iterations: k,
                    converged: true,
                    residual,
                });
            }
            for i in 0..n {
                y[i] = x[i] + xi * (x[i] - x_old[i]);
            }
            self.gradient(&y, &mut grad);
            std::mem::swap(&mut x_old, &mut x);
            let mut uphill = 0.0;
            for i in 0..n {
                x[i] = project_interval(y[i] - step * grad[i], bounds);
                uphill += (y[i] - x[i]) * (x[i] - x_old[i]);
            }
            if xi > 0.0 && uphill > 0.0 {
                // momentum points against the gradient mapping: restart
                x_old.copy_from_slice(&x);
            }
        }
        let residual = self.mapping_residual(&x, &mut scratch, step);
        Ok(SmoothedSolution {
            x,
            iterations: max_iter,
            converged: residual <= tol,
            residual,
        })
    }

    /// Nesterov momentum from the curvature bounds of this problem.
    pub fn default_momentum(&self) -> Result<f64> {
        let step = 1.0 / smoothing_lipschitz(self.rho);
        xi_from(smoothing_strong_convexity(self.rho, self.cfg.horizon), step)
    }
}
