//! Discrete norms, perturbation extraction, power-law rate fitting and the
//! sign-partitioned energy diagnostic.

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::profiles::{Multiwave, TildeU};

/// Discrete L^q norm (midpoint rule over cells).
pub fn lq_norm(gf: &GridFunction, q: f64) -> Result<f64> {
    if !(q.is_finite() && q >= 1.0) {
        return Err(Error::InvalidQ(q));
    }
    let dx = gf.dx();
    let s: f64 = gf.values.iter().map(|v| v.abs().powf(q)).sum();
    Ok((s * dx).powf(1.0 / q))
}

/// Discrete sup norm (grid max).
pub fn linf_norm(gf: &GridFunction) -> f64 {
    gf.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Discrete L^q norm of the spatial derivative, over face difference
/// quotients.
pub fn deriv_lq_norm(gf: &GridFunction, q: f64) -> Result<f64> {
    if !(q.is_finite() && q >= 1.0) {
        return Err(Error::InvalidQ(q));
    }
    if gf.n() < 2 {
        return Err(Error::InvalidGrid("need at least 2 cells for face slopes".into()));
    }
    let dx = gf.dx();
    let s: f64 = gf.face_slopes().iter().map(|s| s.abs().powf(q)).sum();
    Ok((s * dx).powf(1.0 / q))
}

/// Reference profile a perturbation is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Reference {
    #[serde(rename = "tildeU")]
    TildeU,
    #[serde(rename = "multiwave")]
    Multiwave,
}

/// Deviation of a sampled solution from a reference profile at time t.
pub fn perturbation(
    u: &GridFunction,
    reference: Reference,
    tilde_u: &TildeU,
    t: f64,
) -> Result<GridFunction> {
    let spec = u.spec();
    let xs: Vec<f64> = (0..spec.n).map(|j| spec.cell_center(j)).collect();
    let reference_values = match reference {
        Reference::TildeU => tilde_u.sample_value_and_dx(t, &xs).0,
        Reference::Multiwave => {
            let mw = Multiwave::new(&tilde_u.params)?;
            xs.iter().map(|&x| mw.value(t, x)).collect::<Result<Vec<f64>>>()?
        }
    };
    let values = u
        .values
        .iter()
        .zip(&reference_values)
        .map(|(u, r)| u - r)
        .collect();
    GridFunction::new(spec, values)
}

/// A fitted power law: least squares of log(value) against log(1 + t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r2: f64,
    pub window: (f64, f64),
}

/// Fit `value ~ C (1+t)^exponent` over the samples with t inside `window`.
pub fn fit_rate(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<RateFit> {
    assert_eq!(times.len(), values.len());
    let (t1, t2) = window;
    if !(t1 < t2) {
        return Err(Error::InvalidParams(format!("bad fit window [{t1}, {t2}]")));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t < t1 || t > t2 {
            continue;
        }
        if !(v > 0.0) {
            return Err(Error::NonPositiveValues(v));
        }
        xs.push((1.0 + t).ln());
        ys.push(v.ln());
    }
    if xs.len() < 8 {
        return Err(Error::InsufficientData { got: xs.len(), need: 8 });
    }
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - ym) * (y - ym)).sum();
    let r2 = if ss_tot <= f64::EPSILON * n {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(RateFit { exponent: slope, intercept, r2, window })
}

/// The sign-partitioned energy functional G_q: four nonnegative integrals
/// over regions cut by the signs of the asymptotic state and the perturbed
/// solution. Region membership is decided per cell center.
pub fn gq_diagnostic(phi: &GridFunction, state: &TildeU, t: f64, q: f64) -> Result<f64> {
    if !(q.is_finite() && q >= 2.0) {
        return Err(Error::InvalidQ(q));
    }
    let spec = phi.spec();
    let xs: Vec<f64> = (0..spec.n).map(|j| spec.cell_center(j)).collect();
    let (tu, dtu) = state.sample_value_and_dx(t, &xs);
    let dx = spec.dx();
    let mut total = 0.0;
    for j in 0..spec.n {
        let p = phi.values[j];
        let (u_tilde, du_tilde) = (tu[j], dtu[j]);
        let w = p.abs();
        let contrib = if u_tilde + p >= 0.0 && u_tilde >= 0.0 {
            w.powf(q)
        } else if u_tilde + p < 0.0 && u_tilde >= 0.0 {
            w.powf(q - 1.0) * u_tilde + u_tilde.powf(q)
        } else if u_tilde + p >= 0.0 && u_tilde < 0.0 {
            w.powf(q - 1.0) * (q * u_tilde + (q - 1.0) * w) + u_tilde.abs().powf(q)
        } else {
            0.0
        };
        total += contrib * du_tilde * dx;
    }
    Ok(total)
}

/// Scale-invariant interpolation ratio
/// R = ||phi||_inf / [ (int phi^2)^{p/(3p+q-1)} (int |phi|^{q-2} |d_x phi|^{p+1})^{1/(3p+q-1)} ].
///
/// Invariant under phi(x) -> c phi(lambda x), which is the testable content
/// of the Gagliardo-Nirenberg-type bound; the constant itself is not pinned.
pub fn interp_scaling_check(phi: &GridFunction, p: f64, q: f64) -> Result<f64> {
    if !(q.is_finite() && q >= 2.0) {
        return Err(Error::InvalidQ(q));
    }
    let sup = linf_norm(phi);
    if sup == 0.0 {
        return Err(Error::DivisionByZero);
    }
    let dx = phi.dx();
    let i2: f64 = phi.values.iter().map(|v| v * v).sum::<f64>() * dx;
    // face-centered gradient with cell-averaged |phi|^{q-2} weight
    let mut iq = 0.0;
    for j in 0..phi.n() - 1 {
        let s = (phi.values[j + 1] - phi.values[j]) / dx;
        let w = 0.5 * (phi.values[j].abs() + phi.values[j + 1].abs());
        iq += w.powf(q - 2.0) * s.abs().powf(p + 1.0) * dx;
    }
    let denom = i2.powf(p / (3.0 * p + q - 1.0)) * iq.powf(1.0 / (3.0 * p + q - 1.0));
    if denom == 0.0 {
        return Err(Error::DivisionByZero);
    }
    Ok(sup / denom)
}
