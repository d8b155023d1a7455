//! Problem parameters: diffusion exponent, viscosity, far fields, flux.

use crate::error::{Error, Result};
use crate::flux::FluxModel;

/// Parameters of the conservation law
/// `d_t u + d_x f(u) = mu d_x(|d_x u|^{p-1} d_x u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub p: f64,
    pub mu: f64,
    pub u_minus: f64,
    pub u_plus: f64,
    pub flux: FluxModel,
}

impl Params {
    pub fn new(p: f64, mu: f64, u_minus: f64, u_plus: f64, flux: FluxModel) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidParams(format!("need p > 1 (got {p})")));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidParams(format!("need mu > 0 (got {mu})")));
        }
        if !(u_minus.is_finite() && u_plus.is_finite() && u_minus < u_plus) {
            return Err(Error::InvalidParams(format!(
                "need u_minus < u_plus (got {u_minus}, {u_plus})"
            )));
        }
        Ok(Self { p, mu, u_minus, u_plus, flux })
    }

    /// Jump carried by the full Riemann datum.
    pub fn mass(&self) -> f64 {
        self.u_plus - self.u_minus
    }

    /// True for the reduced setting: flux flat on (-inf, 0), convex on
    /// [0, inf), far fields straddling zero.
    pub fn is_reduced(&self) -> bool {
        self.flux.kind == crate::flux::FluxKind::ReducedQuadratic
            && self.u_minus < 0.0
            && self.u_plus > 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_ranges() {
        let f = FluxModel::reduced_quadratic();
        assert!(Params::new(2.0, 1.0, -0.5, 0.5, f).is_ok());
        assert!(Params::new(1.0, 1.0, -0.5, 0.5, f).is_err());
        assert!(Params::new(2.0, 0.0, -0.5, 0.5, f).is_err());
        assert!(Params::new(2.0, 1.0, 0.5, -0.5, f).is_err());
        assert!(Params::new(2.0, 1.0, 0.5, 0.5, f).is_err());
    }
}
