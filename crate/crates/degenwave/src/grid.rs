//! Uniform 1-D cell-centered grids.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Description of a uniform grid: domain endpoints and cell count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_min < self.x_max) {
            return Err(Error::InvalidGrid(format!(
                "need finite x_min < x_max (got [{}, {}])",
                self.x_min, self.x_max
            )));
        }
        if self.n < 3 {
            return Err(Error::InvalidGrid(format!("need n >= 3 cells (got {})", self.n)));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    pub fn cell_center(&self, j: usize) -> f64 {
        self.x_min + (j as f64 + 0.5) * self.dx()
    }
}

/// A sampled field on a uniform grid; values live at cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    spec: GridSpec,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.n {
            return Err(Error::InvalidGrid(format!(
                "value count {} does not match cell count {}",
                values.len(),
                spec.n
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("non-finite sample value".into()));
        }
        Ok(Self { spec, values })
    }

    /// Sample `f` at every cell center.
    pub fn sample<F: Fn(f64) -> f64>(spec: GridSpec, f: F) -> Result<Self> {
        spec.validate()?;
        let values = (0..spec.n).map(|j| f(spec.cell_center(j))).collect();
        Self::new(spec, values)
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn dx(&self) -> f64 {
        self.spec.dx()
    }

    pub fn cell_center(&self, j: usize) -> f64 {
        self.spec.cell_center(j)
    }

    /// Face difference quotients (u_{j+1} - u_j) / dx for the n-1 interior faces.
    pub fn face_slopes(&self) -> Vec<f64> {
        let dx = self.dx();
        self.values.windows(2).map(|w| (w[1] - w[0]) / dx).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_centers() {
        let spec = GridSpec { x_min: -1.0, x_max: 1.0, n: 4 };
        assert_eq!(spec.dx(), 0.5);
        assert_eq!(spec.cell_center(0), -0.75);
        assert_eq!(spec.cell_center(3), 0.75);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(GridSpec { x_min: 0.0, x_max: 0.0, n: 8 }.validate().is_err());
        assert!(GridSpec { x_min: 0.0, x_max: 1.0, n: 2 }.validate().is_err());
        assert!(GridFunction::new(
            GridSpec { x_min: 0.0, x_max: 1.0, n: 4 },
            vec![0.0, f64::NAN, 0.0, 0.0]
        )
        .is_err());
    }

    #[test]
    fn face_slopes_of_linear_ramp_are_constant() {
        let spec = GridSpec { x_min: 0.0, x_max: 1.0, n: 10 };
        let gf = GridFunction::sample(spec, |x| 3.0 * x).unwrap();
        for s in gf.face_slopes() {
            assert!((s - 3.0).abs() < 1e-12);
        }
    }
}
