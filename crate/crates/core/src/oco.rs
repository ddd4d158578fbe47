//! Scalar primitives shared by every online and offline solver: interval
//! projection, a central-difference gradient check and the Nesterov
//! momentum coefficient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[lo, hi]`. `hi` may be `+inf`, which is how the
/// nonnegative half-line used for multipliers is represented.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() {
            return Err(Error::param("interval bound is NaN"));
        }
        if lo > hi {
            return Err(Error::param(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    /// `[0, +inf)`
    pub const fn nonnegative() -> Self {
        Self {
            lo: 0.0,
            hi: f64::INFINITY,
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Euclidean projection of `v` onto `bounds`.
#[inline]
pub fn project_interval(v: f64, bounds: Interval) -> f64 {
    v.max(bounds.lo).min(bounds.hi)
}

/// Relative error between `analytic` and the central difference
/// `(f(p + eps) - f(p - eps)) / (2 eps)`, scaled by `max(1, |analytic|)`.
pub fn check_gradient<F>(f: F, analytic: f64, point: f64, eps: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::param(format!("eps must be positive, got {eps}")));
    }
    let hi = f(point + eps);
    let lo = f(point - eps);
    if !hi.is_finite() || !lo.is_finite() || !analytic.is_finite() {
        return Err(Error::Numeric(format!(
            "non-finite value in gradient check at {point}"
        )));
    }
    let fd = (hi - lo) / (2.0 * eps);
    Ok((analytic - fd).abs() / analytic.abs().max(1.0))
}

/// Momentum coefficient `(1 - sqrt(zeta*eta)) / (1 + sqrt(zeta*eta))`.
pub fn xi_from(zeta: f64, eta: f64) -> Result<f64> {
    if !(zeta >= 0.0) || !(eta > 0.0) {
        return Err(Error::param(format!(
            "momentum needs zeta >= 0 and eta > 0 (zeta={zeta}, eta={eta})"
        )));
    }
    let prod = zeta * eta;
    if prod > 1.0 {
        return Err(Error::param(format!(
            "zeta*eta = {prod} exceeds 1; momentum would be negative"
        )));
    }
    let s = prod.sqrt();
    Ok((1.0 - s) / (1.0 + s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table() -> Interval {
        Interval::new(0.041, 0.834).unwrap()
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_interval(0.9, table()), 0.834);
        assert_eq!(project_interval(0.5, table()), 0.5);
        assert_eq!(project_interval(-1.0, Interval::nonnegative()), 0.0);
        assert_eq!(project_interval(1e300, Interval::nonnegative()), 1e300);
    }

    #[test]
    fn interval_rejects_inverted_bounds() {
        assert!(matches!(Interval::new(1.0, 0.0), Err(Error::Parameter(_))));
        assert!(Interval::new(f64::NAN, 0.0).is_err());
        assert!(Interval::new(0.3, 0.3).is_ok());
    }

    #[test]
    fn gradient_check_quadratic_and_linear() {
        let err = check_gradient(|x| x * x, 6.0, 3.0, 1e-5).unwrap();
        assert!(err <= 1e-8, "{err}");
        for p in [-50.0, 0.0, 0.3, 7.5] {
            let err = check_gradient(|x| 4.25 * x, 4.25, p, 1e-3).unwrap();
            assert!(err <= 1e-10, "{err}");
        }
    }

    #[test]
    fn gradient_check_flags_bad_inputs() {
        assert!(matches!(
            check_gradient(|x| x, 1.0, 0.0, 0.0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            check_gradient(|x| x.ln(), 1.0, -5.0, 1e-3),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn xi_examples() {
        assert_eq!(xi_from(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(xi_from(4.0, 0.25).unwrap(), 0.0);
        assert_eq!(xi_from(0.0, 0.3).unwrap(), 1.0);
        assert!((xi_from(0.25, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(xi_from(2.0, 1.0).is_err());
        assert!(xi_from(-1.0, 1.0).is_err());
        assert!(xi_from(1.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn projection_is_idempotent(v in -10.0f64..10.0, lo in -5.0f64..5.0, w in 0.0f64..5.0) {
            let b = Interval::new(lo, lo + w).unwrap();
            let p = project_interval(v, b);
            prop_assert!(b.contains(p));
            prop_assert_eq!(project_interval(p, b), p);
        }

        #[test]
        fn projection_is_nonexpansive(a in -10.0f64..10.0, c in -10.0f64..10.0, lo in -5.0f64..5.0, w in 0.0f64..5.0) {
            let b = Interval::new(lo, lo + w).unwrap();
            prop_assert!((project_interval(a, b) - project_interval(c, b)).abs() <= (a - c).abs());
        }

        #[test]
        fn xi_stays_in_unit_interval(zeta in 0.0f64..10.0, eta in 1e-6f64..1.0) {
            prop_assume!(zeta * eta <= 1.0);
            let xi = xi_from(zeta, eta).unwrap();
            prop_assert!((0.0..=1.0).contains(&xi));
        }
    }
}
