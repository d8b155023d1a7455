//! Piecewise-quadratic flux models with a linearly degenerate interval.
//!
//! All supported fluxes have nondecreasing derivatives, so the hyperbolic
//! part stays convex (up to a flat stretch) and the Riemann solution is a
//! combination of rarefaction fans and one contact discontinuity.

use crate::error::{Error, Result};
use crate::numerics::find_root_monotone;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxKind {
    /// f = 0: pure degenerate-diffusion mode.
    Zero,
    /// f(u) = u^2/2 for u >= 0 and 0 for u < 0; convex on [0, inf),
    /// flat on the negative half line.
    ReducedQuadratic,
    /// f(u) = (u-a)^2/2 below a, 0 on (a, b), (u-b)^2/2 above b.
    IntervalDegenerate,
}

/// A flux function together with its first two derivatives.
///
/// `tilt` adds a linear term c*u on top of the piecewise-quadratic part,
/// shifting every wave speed by c without changing convexity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxModel {
    pub kind: FluxKind,
    pub a: f64,
    pub b: f64,
    pub tilt: f64,
}

/// Build a flux model, validating the degeneracy interval.
pub fn make_flux(kind: FluxKind, a: f64, b: f64, tilt: f64) -> Result<FluxModel> {
    if !tilt.is_finite() {
        return Err(Error::InvalidFlux("tilt must be finite".into()));
    }
    match kind {
        FluxKind::Zero => {
            if tilt != 0.0 {
                return Err(Error::InvalidFlux("zero flux cannot carry a tilt".into()));
            }
            Ok(FluxModel { kind, a: 0.0, b: 0.0, tilt: 0.0 })
        }
        FluxKind::ReducedQuadratic => Ok(FluxModel { kind, a: 0.0, b: 0.0, tilt }),
        FluxKind::IntervalDegenerate => {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::InvalidFlux(format!(
                    "degeneracy interval requires a < b (got a = {a}, b = {b})"
                )));
            }
            Ok(FluxModel { kind, a, b, tilt })
        }
    }
}

impl FluxModel {
    pub fn zero() -> Self {
        make_flux(FluxKind::Zero, 0.0, 0.0, 0.0).unwrap()
    }

    pub fn reduced_quadratic() -> Self {
        make_flux(FluxKind::ReducedQuadratic, 0.0, 0.0, 0.0).unwrap()
    }

    /// f(u)
    pub fn eval(&self, u: f64) -> f64 {
        let quad = match self.kind {
            FluxKind::Zero => 0.0,
            FluxKind::ReducedQuadratic => {
                if u >= 0.0 {
                    0.5 * u * u
                } else {
                    0.0
                }
            }
            FluxKind::IntervalDegenerate => {
                if u <= self.a {
                    0.5 * (u - self.a) * (u - self.a)
                } else if u >= self.b {
                    0.5 * (u - self.b) * (u - self.b)
                } else {
                    0.0
                }
            }
        };
        quad + self.tilt * u
    }

    /// f'(u), the characteristic speed; nondecreasing in u.
    pub fn deriv(&self, u: f64) -> f64 {
        let quad = match self.kind {
            FluxKind::Zero => 0.0,
            FluxKind::ReducedQuadratic => u.max(0.0),
            FluxKind::IntervalDegenerate => {
                if u <= self.a {
                    u - self.a
                } else if u >= self.b {
                    u - self.b
                } else {
                    0.0
                }
            }
        };
        quad + self.tilt
    }

    /// f''(u); at the junction points the convex-side value is used so
    /// closed branches [u_minus, a] and [b, u_plus] qualify as convex.
    pub fn deriv2(&self, u: f64) -> f64 {
        match self.kind {
            FluxKind::Zero => 0.0,
            FluxKind::ReducedQuadratic => {
                if u >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            FluxKind::IntervalDegenerate => {
                if u <= self.a || u >= self.b {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Endpoints (s0, s1) of the zero set of f' (s0 = s1 for a simple
    /// crossing; infinite when f' never changes sign on that side).
    pub fn zero_speed_interval(&self) -> (f64, f64) {
        let c = self.tilt;
        match self.kind {
            FluxKind::Zero => (f64::NEG_INFINITY, f64::INFINITY),
            FluxKind::ReducedQuadratic => {
                if c > 0.0 {
                    (f64::NEG_INFINITY, f64::NEG_INFINITY)
                } else if c == 0.0 {
                    (f64::NEG_INFINITY, 0.0)
                } else {
                    (-c, -c)
                }
            }
            FluxKind::IntervalDegenerate => {
                if c > 0.0 {
                    (self.a - c, self.a - c)
                } else if c == 0.0 {
                    (self.a, self.b)
                } else {
                    (self.b - c, self.b - c)
                }
            }
        }
    }

    /// True when f'' > 0 on the whole closed interval [lo, hi].
    pub fn is_convex_branch(&self, lo: f64, hi: f64) -> bool {
        if lo > hi {
            return false;
        }
        match self.kind {
            FluxKind::Zero => false,
            FluxKind::ReducedQuadratic => lo >= 0.0,
            FluxKind::IntervalDegenerate => hi <= self.a || lo >= self.b,
        }
    }
}

/// Invert the characteristic speed on a strictly convex branch: returns u
/// in [branch_lo, branch_hi] with f'(u) = w, by bisection to 1e-12.
pub fn lambda_inverse(flux: &FluxModel, w: f64, branch_lo: f64, branch_hi: f64) -> Result<f64> {
    if !flux.is_convex_branch(branch_lo, branch_hi) {
        return Err(Error::OutOfBranch(format!(
            "[{branch_lo}, {branch_hi}] is not a convex branch"
        )));
    }
    let (wlo, whi) = (flux.deriv(branch_lo), flux.deriv(branch_hi));
    if w < wlo || w > whi {
        return Err(Error::OutOfBranch(format!(
            "speed {w} outside branch speed range [{wlo}, {whi}]"
        )));
    }
    find_root_monotone(|u| flux.deriv(u) - w, branch_lo, branch_hi, 1e-12)
}

/// Closed-form speed inversion for the piecewise-quadratic family, where
/// f' is linear with unit slope on every convex branch. Cross-checked
/// against the bisection route in tests.
pub(crate) fn invert_speed_linear(flux: &FluxModel, w: f64, branch_lo: f64, branch_hi: f64) -> f64 {
    debug_assert!(flux.is_convex_branch(branch_lo, branch_hi));
    let shift = match flux.kind {
        FluxKind::Zero => unreachable!("zero flux has no convex branch"),
        FluxKind::ReducedQuadratic => 0.0,
        FluxKind::IntervalDegenerate => {
            if branch_hi <= flux.a {
                flux.a
            } else {
                flux.b
            }
        }
    };
    (w - flux.tilt + shift).clamp(branch_lo, branch_hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_quadratic_values() {
        let f = FluxModel::reduced_quadratic();
        assert_eq!(f.eval(2.0), 2.0);
        assert_eq!(f.deriv(2.0), 2.0);
        assert_eq!(f.deriv2(2.0), 1.0);
        assert_eq!(f.eval(-1.0), 0.0);
        assert_eq!(f.deriv(-1.0), 0.0);
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.deriv(0.0), 0.0);
    }

    #[test]
    fn interval_degenerate_values() {
        let f = make_flux(FluxKind::IntervalDegenerate, -1.0, 0.0, 0.0).unwrap();
        assert_eq!(f.eval(-1.0), 0.0);
        assert_eq!(f.eval(-0.5), 0.0);
        assert_eq!(f.eval(1.0), 0.5);
        assert_eq!(f.deriv(-2.0), -1.0);
        assert_eq!(f.deriv(0.25), 0.25);
        assert_eq!(f.deriv2(-0.5), 0.0);
    }

    #[test]
    fn zero_flux_vanishes() {
        let f = FluxModel::zero();
        for u in [-3.0, 0.0, 7.5] {
            assert_eq!(f.eval(u), 0.0);
            assert_eq!(f.deriv(u), 0.0);
        }
    }

    #[test]
    fn rejects_bad_interval() {
        assert!(make_flux(FluxKind::IntervalDegenerate, 1.0, 1.0, 0.0).is_err());
        assert!(make_flux(FluxKind::IntervalDegenerate, 2.0, -1.0, 0.0).is_err());
        assert!(make_flux(FluxKind::ReducedQuadratic, 0.0, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn deriv_nondecreasing_on_dense_grid() {
        let models = [
            FluxModel::zero(),
            FluxModel::reduced_quadratic(),
            make_flux(FluxKind::IntervalDegenerate, -1.0, 0.5, 0.0).unwrap(),
            make_flux(FluxKind::IntervalDegenerate, -2.0, 3.0, -0.7).unwrap(),
            make_flux(FluxKind::ReducedQuadratic, 0.0, 0.0, 1.3).unwrap(),
        ];
        for f in &models {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..10_000 {
                let u = -10.0 + 20.0 * (i as f64) / 9_999.0;
                let d = f.deriv(u);
                assert!(d >= prev, "f' decreased at u = {u}");
                prev = d;
            }
        }
    }

    #[test]
    fn lambda_inverse_examples() {
        let f = FluxModel::reduced_quadratic();
        let u = lambda_inverse(&f, 0.5, 0.0, 10.0).unwrap();
        assert!((u - 0.5).abs() <= 1e-11);
        let u = lambda_inverse(&f, 0.0, 0.0, 10.0).unwrap();
        assert!(u.abs() <= 1e-11);

        let f = make_flux(FluxKind::IntervalDegenerate, -1.0, 0.0, 0.0).unwrap();
        let u = lambda_inverse(&f, 0.25, 0.0, 5.0).unwrap();
        assert!((u - 0.25).abs() <= 1e-11);
    }

    #[test]
    fn lambda_inverse_rejects_out_of_range_speed() {
        let f = FluxModel::reduced_quadratic();
        assert!(matches!(
            lambda_inverse(&f, 3.0, 0.0, 1.0),
            Err(Error::OutOfBranch(_))
        ));
        // branch containing the flat part is not convex
        assert!(lambda_inverse(&f, 0.5, -1.0, 1.0).is_err());
    }

    #[test]
    fn linear_inversion_agrees_with_bisection() {
        let cases = [
            (FluxModel::reduced_quadratic(), 0.0, 8.0),
            (make_flux(FluxKind::IntervalDegenerate, -1.0, 0.0, 0.3).unwrap(), 0.0, 4.0),
            (make_flux(FluxKind::IntervalDegenerate, -3.0, 1.0, 0.0).unwrap(), -9.0, -3.0),
        ];
        for (f, lo, hi) in cases {
            for i in 0..50 {
                let u = lo + (hi - lo) * (i as f64 + 0.5) / 50.0;
                let w = f.deriv(u);
                let fast = invert_speed_linear(&f, w, lo, hi);
                let slow = lambda_inverse(&f, w, lo, hi).unwrap();
                assert!((fast - slow).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn lambda_inverse_is_right_inverse_of_deriv() {
        // 100 deterministic branch points on each model's convex branch
        let cases = [
            (FluxModel::reduced_quadratic(), 0.0, 8.0),
            (make_flux(FluxKind::IntervalDegenerate, -1.0, 0.0, 0.0).unwrap(), 0.0, 4.0),
            (make_flux(FluxKind::IntervalDegenerate, -3.0, 1.0, 0.4).unwrap(), 1.0, 6.0),
            (make_flux(FluxKind::IntervalDegenerate, -3.0, 1.0, 0.0).unwrap(), -9.0, -3.0),
        ];
        for (f, lo, hi) in cases {
            for i in 0..100 {
                let u = lo + (hi - lo) * (i as f64 + 0.5) / 100.0;
                let w = f.deriv(u);
                let back = lambda_inverse(&f, w, lo, hi).unwrap();
                assert!((back - u).abs() <= 1e-10, "roundtrip failed at u = {u}");
            }
        }
    }
}
