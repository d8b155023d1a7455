//! Closed-form asymptotic wave profiles: the Barenblatt source solution,
//! the viscous contact wave built from it, exact and smoothed rarefaction
//! fans, the composite multiwave pattern, the approximate asymptotic state
//! and its equation remainder, and the zero-crossing point of that state.
//!
//! Time conventions differ between uses: standalone self-similar profiles
//! use the raw time t, while the composite asymptotic state shifts the
//! contact piece to 1 + t. The shift is an explicit constructor argument
//! everywhere, never implied.

use crate::error::{Error, Result};
use crate::flux::{invert_speed_linear, FluxKind, FluxModel};
use crate::numerics::{find_root_expanding, quad_value};
use crate::params::Params;
use std::f64::consts::FRAC_PI_2;

/// Quadrature tolerance for profile integrals.
const PROFILE_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Self-similar constants
// ---------------------------------------------------------------------------

/// Constants of the self-similar contact profile: amplitude `a`, spreading
/// `b`, the angular integral `i_p`, and the jump `mass` they normalize.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfSimilarConstants {
    pub p: f64,
    pub mu: f64,
    pub a: f64,
    pub b: f64,
    pub i_p: f64,
    pub mass: f64,
}

/// Compute the self-similar constants for exponent `p`, viscosity `mu` and
/// jump `mass`.
///
/// `b` comes from the closed formula (p-1)/(2 mu p (p+1)); `i_p` is the
/// angular integral of sin^{(p+1)/(p-1)}; `a` is fixed so that the profile
/// carries exactly `mass`, i.e. 2 a^{(p+1)/(2(p-1))} b^{-1/2} i_p = mass.
pub fn selfsimilar_constants(p: f64, mu: f64, mass: f64) -> Result<SelfSimilarConstants> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::InvalidParams(format!("need p > 1 (got {p})")));
    }
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::InvalidParams(format!("need mu > 0 (got {mu})")));
    }
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::InvalidParams(format!("need mass > 0 (got {mass})")));
    }
    let sin_pow = (p + 1.0) / (p - 1.0);
    let i_p = quad_value(|t| t.sin().powf(sin_pow), 0.0, FRAC_PI_2, PROFILE_TOL)?;
    let b = (p - 1.0) / (2.0 * mu * p * (p + 1.0));
    let a = ((p - 1.0) * mass * mass / (8.0 * mu * p * (p + 1.0) * i_p * i_p))
        .powf((p - 1.0) / (p + 1.0));
    Ok(SelfSimilarConstants { p, mu, a, b, i_p, mass })
}

impl SelfSimilarConstants {
    /// Half-width of the profile support in the self-similar variable.
    pub fn support_radius(&self) -> f64 {
        (self.a / self.b).sqrt()
    }

    /// Relative residual of the normalization identity
    /// 2 a^{(p+1)/(2(p-1))} b^{-1/2} i_p = mass, recomputed from the stored
    /// fields (never assumed).
    pub fn normalization_residual(&self) -> f64 {
        let lhs =
            2.0 * self.a.powf((self.p + 1.0) / (2.0 * (self.p - 1.0))) / self.b.sqrt() * self.i_p;
        (lhs - self.mass).abs() / self.mass
    }
}

/// Barenblatt profile value at effective time `tau > 0`:
/// tau^{-1/(p+1)} ((a - b (x/tau^{1/(p+1)})^2) v 0)^{1/(p-1)}.
pub fn barenblatt(c: &SelfSimilarConstants, tau: f64, x: f64) -> f64 {
    debug_assert!(tau > 0.0, "barenblatt needs positive effective time");
    let scale = tau.powf(1.0 / (c.p + 1.0));
    let xi = x / scale;
    let core = c.a - c.b * xi * xi;
    if core <= 0.0 {
        0.0
    } else {
        core.powf(1.0 / (c.p - 1.0)) / scale
    }
}

/// Spatial derivative of the Barenblatt profile (zero outside the support;
/// unbounded near the free boundary when p > 2).
pub fn barenblatt_dx(c: &SelfSimilarConstants, tau: f64, x: f64) -> f64 {
    let scale = tau.powf(1.0 / (c.p + 1.0));
    let xi = x / scale;
    let core = c.a - c.b * xi * xi;
    if core <= 0.0 {
        0.0
    } else {
        -2.0 * c.b / (c.p - 1.0) * xi * core.powf((2.0 - c.p) / (c.p - 1.0)) / (scale * scale)
    }
}

// ---------------------------------------------------------------------------
// Viscous contact wave
// ---------------------------------------------------------------------------

/// The viscous contact wave connecting `u_minus` to `u_plus`: the
/// antiderivative of the Barenblatt profile, evaluated at effective time
/// t + time_offset.
#[derive(Debug, Clone, Copy)]
pub struct ContactWave {
    pub c: SelfSimilarConstants,
    pub u_minus: f64,
    pub u_plus: f64,
    pub time_offset: f64,
}

impl ContactWave {
    pub fn new(p: f64, mu: f64, u_minus: f64, u_plus: f64, time_offset: u8) -> Result<Self> {
        if u_minus >= u_plus {
            return Err(Error::InvalidParams(format!(
                "contact wave needs u_minus < u_plus (got {u_minus}, {u_plus})"
            )));
        }
        if time_offset > 1 {
            return Err(Error::InvalidParams("time_offset must be 0 or 1".into()));
        }
        let c = selfsimilar_constants(p, mu, u_plus - u_minus)?;
        Ok(Self { c, u_minus, u_plus, time_offset: time_offset as f64 })
    }

    pub fn tau(&self, t: f64) -> f64 {
        t + self.time_offset
    }

    fn scale(&self, t: f64) -> f64 {
        self.tau(t).powf(1.0 / (self.c.p + 1.0))
    }

    /// Edge of the variation support at time t (the free boundary sits at
    /// +- this point).
    pub fn support_edge(&self, t: f64) -> f64 {
        self.c.support_radius() * self.scale(t)
    }

    /// Profile value. The integral is computed in the angular variable
    /// xi = R sin(theta), which removes the free-boundary kink; the side
    /// nearer to the evaluation point anchors the integral to avoid
    /// cancellation.
    pub fn value(&self, t: f64, x: f64) -> f64 {
        let tau = self.tau(t);
        debug_assert!(tau > 0.0, "contact wave needs positive effective time");
        let r = self.c.support_radius();
        let xi = x / self.scale(t);
        if xi <= -r {
            return self.u_minus;
        }
        if xi >= r {
            return self.u_plus;
        }
        let phi = (xi / r).clamp(-1.0, 1.0).asin();
        let k = self.c.a.powf(1.0 / (self.c.p - 1.0)) * r;
        let cos_pow = (self.c.p + 1.0) / (self.c.p - 1.0);
        let g = |th: f64| th.cos().powf(cos_pow);
        if xi <= 0.0 {
            self.u_minus
                + k * quad_value(g, -FRAC_PI_2, phi, PROFILE_TOL).expect("smooth angular integrand")
        } else {
            self.u_plus
                - k * quad_value(g, phi, FRAC_PI_2, PROFILE_TOL).expect("smooth angular integrand")
        }
    }

    /// Cross-check path: direct integration of the self-similar integrand
    /// without the angular substitution (the support edges, where the
    /// integrand has its kink, bound the integration range).
    pub fn value_direct(&self, t: f64, x: f64) -> Result<f64> {
        let r = self.c.support_radius();
        let xi = x / self.scale(t);
        if xi <= -r {
            return Ok(self.u_minus);
        }
        let one_over = 1.0 / (self.c.p - 1.0);
        let g = |s: f64| (self.c.a - self.c.b * s * s).max(0.0).powf(one_over);
        let v = quad_value(g, -r, xi.min(r), 1e-9)?;
        Ok(self.u_minus + v)
    }

    /// d/dx of the wave: exactly the Barenblatt profile at time tau.
    pub fn dx(&self, t: f64, x: f64) -> f64 {
        barenblatt(&self.c, self.tau(t), x)
    }

    /// d2/dx2, analytic inside the support, zero outside. For p > 2 the
    /// value is unbounded as the free boundary is approached; callers that
    /// integrate across the boundary must work in the angular variable.
    pub fn dxx(&self, t: f64, x: f64) -> f64 {
        barenblatt_dx(&self.c, self.tau(t), x)
    }

    /// d/dx of |d_x U|^{p-1} d_x U, analytic (d_x U >= 0 everywhere).
    pub fn pflux_dx(&self, t: f64, x: f64) -> f64 {
        let tau = self.tau(t);
        let scale = self.scale(t);
        let xi = x / scale;
        let core = self.c.a - self.c.b * xi * xi;
        if core <= 0.0 {
            0.0
        } else {
            -2.0 * self.c.b * self.c.p / (self.c.p - 1.0)
                * xi
                * core.powf(1.0 / (self.c.p - 1.0))
                / tau
        }
    }

    /// Values at many (sorted) sample points via one cumulative pass, far
    /// cheaper than independent quadratures per point.
    pub fn sample_values(&self, t: f64, xs: &[f64]) -> Vec<f64> {
        debug_assert!(xs.windows(2).all(|w| w[0] <= w[1]), "sample points must be sorted");
        let r = self.c.support_radius();
        let scale = self.scale(t);
        let k = self.c.a.powf(1.0 / (self.c.p - 1.0)) * r;
        let cos_pow = (self.c.p + 1.0) / (self.c.p - 1.0);
        let g = |th: f64| th.cos().powf(cos_pow);
        let mut out = Vec::with_capacity(xs.len());
        let mut theta_prev = -FRAC_PI_2;
        let mut acc = 0.0;
        for &x in xs {
            let xi = x / scale;
            if xi <= -r {
                out.push(self.u_minus);
                continue;
            }
            if xi >= r {
                out.push(self.u_plus);
                continue;
            }
            let theta = (xi / r).clamp(-1.0, 1.0).asin();
            acc += quad_value(g, theta_prev, theta, 1e-13).expect("smooth angular integrand");
            theta_prev = theta;
            out.push(self.u_minus + k * acc);
        }
        out
    }

    /// L^q norm of d_x U at time t, integrated in the angular variable.
    /// Pass q = f64::INFINITY for the sup norm.
    pub fn deriv_lq_norm(&self, t: f64, q: f64) -> f64 {
        if q.is_infinite() {
            return self.dx(t, 0.0);
        }
        let jac = self.theta_jacobian(t);
        let g = |th: f64| self.dx(t, self.x_of_theta(t, th)).powf(q) * jac(th);
        let i = quad_value(g, 0.0, FRAC_PI_2, scaled_tol(&g)).expect("smooth angular integrand");
        (2.0 * i).powf(1.0 / q)
    }

    /// L^q norm of d2/dx2 U. The angular integrand can carry an integrable
    /// endpoint singularity (p > 2), softened by a quartic substitution
    /// near theta = pi/2.
    pub fn second_deriv_lq_norm(&self, t: f64, q: f64) -> f64 {
        let jac = self.theta_jacobian(t);
        let g = |th: f64| self.dxx(t, self.x_of_theta(t, th)).abs().powf(q) * jac(th);
        let i = quad_soft_end(g, 0.0, FRAC_PI_2, scaled_tol(&g));
        (2.0 * i).powf(1.0 / q)
    }

    /// L^2 norm of d/dx (|d_x U|^{p-1} d_x U).
    pub fn pflux_dx_l2_norm(&self, t: f64) -> f64 {
        let jac = self.theta_jacobian(t);
        let g = |th: f64| {
            let w = self.pflux_dx(t, self.x_of_theta(t, th));
            w * w * jac(th)
        };
        let i = quad_value(g, 0.0, FRAC_PI_2, scaled_tol(&g)).expect("smooth angular integrand");
        (2.0 * i).sqrt()
    }

    fn x_of_theta(&self, t: f64, th: f64) -> f64 {
        self.c.support_radius() * th.sin() * self.scale(t)
    }

    fn theta_jacobian(&self, t: f64) -> impl Fn(f64) -> f64 + '_ {
        let w = self.c.support_radius() * self.scale(t);
        move |th: f64| w * th.cos()
    }
}

/// Absolute quadrature tolerance scaled to the magnitude of an angular
/// integrand over [0, pi/2]: norm integrals shrink with time, so a fixed
/// absolute tolerance would swamp them at large t.
fn scaled_tol<F: Fn(f64) -> f64>(g: &F) -> f64 {
    let mut peak: f64 = 0.0;
    for i in 0..=32 {
        let th = FRAC_PI_2 * (i as f64 + 0.3) / 33.0;
        let v = g(th).abs();
        if v.is_finite() {
            peak = peak.max(v);
        }
    }
    (1e-9 * peak * FRAC_PI_2).max(1e-300)
}

/// Integrate g over [lo, hi] where g may blow up integrably at `hi`:
/// substituting theta = hi - (hi-lo) psi^4 turns the endpoint into a zero
/// of the Jacobian.
fn quad_soft_end<F: Fn(f64) -> f64>(g: F, lo: f64, hi: f64, tol: f64) -> f64 {
    let w = hi - lo;
    quad_value(
        |psi| {
            let jac = 4.0 * w * psi * psi * psi;
            if jac == 0.0 {
                return 0.0;
            }
            g(hi - w * psi * psi * psi * psi) * jac
        },
        0.0,
        1.0,
        tol,
    )
    .expect("softened integrand")
}

// ---------------------------------------------------------------------------
// Rarefaction waves
// ---------------------------------------------------------------------------

fn check_branch(flux: &FluxModel, u_minus: f64, u_plus: f64) -> Result<()> {
    if u_minus >= u_plus {
        return Err(Error::InvalidParams(format!(
            "rarefaction needs u_minus < u_plus (got {u_minus}, {u_plus})"
        )));
    }
    if !flux.is_convex_branch(u_minus, u_plus) {
        return Err(Error::OutOfBranch(format!(
            "[{u_minus}, {u_plus}] exits the convex branch of the flux"
        )));
    }
    Ok(())
}

/// The exact self-similar rarefaction fan between `u_minus` and `u_plus`
/// (both on one convex branch), evaluated at (t, x), t > 0.
pub fn exact_rarefaction(
    flux: &FluxModel,
    u_minus: f64,
    u_plus: f64,
    t: f64,
    x: f64,
) -> Result<f64> {
    check_branch(flux, u_minus, u_plus)?;
    debug_assert!(t > 0.0, "exact rarefaction needs t > 0");
    let (lm, lp) = (flux.deriv(u_minus), flux.deriv(u_plus));
    let w = x / t;
    if w <= lm {
        Ok(u_minus)
    } else if w >= lp {
        Ok(u_plus)
    } else {
        Ok(invert_speed_linear(flux, w, u_minus, u_plus))
    }
}

/// d/dx of the exact fan (one-sided zero at the fan edges).
pub fn exact_rarefaction_dx(
    flux: &FluxModel,
    u_minus: f64,
    u_plus: f64,
    t: f64,
    x: f64,
) -> Result<f64> {
    check_branch(flux, u_minus, u_plus)?;
    let (lm, lp) = (flux.deriv(u_minus), flux.deriv(u_plus));
    let w = x / t;
    if w <= lm || w >= lp {
        Ok(0.0)
    } else {
        let u = invert_speed_linear(flux, w, u_minus, u_plus);
        Ok(1.0 / (flux.deriv2(u) * t))
    }
}

/// Smooth approximation of the rarefaction fan: the classical solution of
/// the Burgers problem with tanh data, mapped through the inverse speed.
#[derive(Debug, Clone, Copy)]
pub struct SmoothRarefaction {
    pub flux: FluxModel,
    pub u_minus: f64,
    pub u_plus: f64,
    lam_minus: f64,
    lam_plus: f64,
}

impl SmoothRarefaction {
    pub fn new(flux: FluxModel, u_minus: f64, u_plus: f64) -> Result<Self> {
        check_branch(&flux, u_minus, u_plus)?;
        Ok(Self {
            flux,
            u_minus,
            u_plus,
            lam_minus: flux.deriv(u_minus),
            lam_plus: flux.deriv(u_plus),
        })
    }

    pub fn lam_minus(&self) -> f64 {
        self.lam_minus
    }

    pub fn lam_plus(&self) -> f64 {
        self.lam_plus
    }

    /// Initial speed profile w0.
    fn w0(&self, x0: f64) -> f64 {
        0.5 * (self.lam_minus + self.lam_plus) + 0.5 * (self.lam_plus - self.lam_minus) * x0.tanh()
    }

    fn w0_deriv(&self, x0: f64) -> f64 {
        let s = 1.0 / x0.cosh();
        0.5 * (self.lam_plus - self.lam_minus) * s * s
    }

    /// Characteristic foot point: the unique x0 with x0 + w0(x0) t = x.
    /// The map is strictly increasing in x0 (1 + w0' t > 0), and the foot
    /// lies a priori in [x - lam_plus t, x - lam_minus t].
    pub fn char_foot(&self, t: f64, x: f64) -> f64 {
        debug_assert!(t >= 0.0);
        if t == 0.0 {
            return x;
        }
        let lo = x - self.lam_plus * t - 1.0;
        let hi = x - self.lam_minus * t + 1.0;
        find_root_expanding(|x0| x0 + self.w0(x0) * t - x, lo, hi, 1e-12, 60)
            .expect("characteristic map is onto")
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        self.value_and_dx(t, x).0
    }

    /// Value and spatial derivative sharing one characteristic solve; the
    /// derivative comes from the chain rule through the implicit map.
    pub fn value_and_dx(&self, t: f64, x: f64) -> (f64, f64) {
        let x0 = self.char_foot(t, x);
        let w = self.w0(x0);
        let u = invert_speed_linear(&self.flux, w, self.u_minus, self.u_plus);
        let wp = self.w0_deriv(x0);
        let dw_dx = wp / (1.0 + wp * t);
        let du = dw_dx / self.flux.deriv2(u);
        (u, du)
    }

    pub fn dx(&self, t: f64, x: f64) -> f64 {
        self.value_and_dx(t, x).1
    }

    /// Numerical sup over a fine characteristic grid (the profile is a
    /// monotone image of x0, so sampling x0 covers the whole line).
    pub fn deriv_linf_norm(&self, t: f64) -> f64 {
        let mut best: f64 = 0.0;
        for i in 0..=4000 {
            let x0 = -20.0 + 40.0 * i as f64 / 4000.0;
            let x = x0 + self.w0(x0) * t;
            best = best.max(self.dx(t, x));
        }
        best
    }

    /// L^q norm of d_x U^r over the line (the integrand decays like
    /// sech^2 of the foot point, so a generous fixed window suffices).
    pub fn deriv_lq_norm(&self, t: f64, q: f64) -> f64 {
        if q.is_infinite() {
            return self.deriv_linf_norm(t);
        }
        let lo = self.lam_minus * t - 40.0;
        let hi = self.lam_plus * t + 40.0;
        let i = quad_value(|x| self.dx(t, x).powf(q), lo, hi, 1e-11)
            .expect("smooth rarefaction norm integrand");
        i.powf(1.0 / q)
    }
}

// ---------------------------------------------------------------------------
// Multiwave pattern
// ---------------------------------------------------------------------------

/// The composite Riemann asymptotics: viscous contact wave (shifted by the
/// degenerate speed) plus exact rarefaction fans, minus matching constants.
#[derive(Debug, Clone)]
pub struct Multiwave {
    flux: FluxModel,
    /// left fan (u_minus, a), present only in the three-wave case
    left_fan: Option<(f64, f64)>,
    contact: ContactWave,
    /// degenerate wave speed shifting the contact frame
    lambda_tilde: f64,
    /// right fan (b_or_zero, u_plus)
    right_fan: (f64, f64),
}

impl Multiwave {
    pub fn new(params: &Params) -> Result<Self> {
        let f = params.flux;
        let (um, up) = (params.u_minus, params.u_plus);
        match f.kind {
            FluxKind::Zero => Err(Error::CaseUnsupported(
                "zero flux admits no multiwave pattern".into(),
            )),
            FluxKind::ReducedQuadratic => {
                if !(um < 0.0 && 0.0 < up) {
                    return Err(Error::CaseUnsupported(format!(
                        "reduced case needs u_minus < 0 < u_plus (got {um}, {up})"
                    )));
                }
                let lambda_tilde = f.tilt;
                Ok(Self {
                    flux: f,
                    left_fan: None,
                    contact: ContactWave::new(params.p, params.mu, um, 0.0, 0)?,
                    lambda_tilde,
                    right_fan: (0.0, up),
                })
            }
            FluxKind::IntervalDegenerate => {
                let (a, b) = (f.a, f.b);
                let lambda_tilde = (f.eval(b) - f.eval(a)) / (b - a);
                if a < um && um < b && b < up {
                    Ok(Self {
                        flux: f,
                        left_fan: None,
                        contact: ContactWave::new(params.p, params.mu, um, b, 0)?,
                        lambda_tilde,
                        right_fan: (b, up),
                    })
                } else if um < a && b < up {
                    Ok(Self {
                        flux: f,
                        left_fan: Some((um, a)),
                        contact: ContactWave::new(params.p, params.mu, a, b, 0)?,
                        lambda_tilde,
                        right_fan: (b, up),
                    })
                } else {
                    Err(Error::CaseUnsupported(format!(
                        "far fields ({um}, {up}) do not straddle the degeneracy interval ({a}, {b})"
                    )))
                }
            }
        }
    }

    pub fn value(&self, t: f64, x: f64) -> Result<f64> {
        if t <= 0.0 {
            return Err(Error::InvalidParams("multiwave needs t > 0".into()));
        }
        let mut v = self.contact.value(t, x - self.lambda_tilde * t);
        if let Some((um, a)) = self.left_fan {
            v += exact_rarefaction(&self.flux, um, a, t, x)? - a;
        }
        let (b, up) = self.right_fan;
        v += exact_rarefaction(&self.flux, b, up, t, x)? - b;
        Ok(v)
    }

    pub fn dx(&self, t: f64, x: f64) -> Result<f64> {
        if t <= 0.0 {
            return Err(Error::InvalidParams("multiwave needs t > 0".into()));
        }
        let mut v = self.contact.dx(t, x - self.lambda_tilde * t);
        if let Some((um, a)) = self.left_fan {
            v += exact_rarefaction_dx(&self.flux, um, a, t, x)?;
        }
        let (b, up) = self.right_fan;
        v += exact_rarefaction_dx(&self.flux, b, up, t, x)?;
        Ok(v)
    }
}

// ---------------------------------------------------------------------------
// Approximate asymptotic state and its remainder
// ---------------------------------------------------------------------------

/// The approximate asymptotic state of the reduced problem: contact wave
/// at time 1 + t connecting u_minus to 0, plus the smoothed rarefaction
/// from 0 to u_plus. Strictly increasing in x for every t >= 0.
#[derive(Debug, Clone, Copy)]
pub struct TildeU {
    pub contact: ContactWave,
    pub rarefaction: SmoothRarefaction,
    pub params: Params,
}

impl TildeU {
    pub fn new(params: &Params) -> Result<Self> {
        if !params.is_reduced() {
            return Err(Error::InvalidParams(
                "the approximate asymptotic state requires the reduced configuration \
                 (reduced_quadratic flux, u_minus < 0 < u_plus)"
                    .into(),
            ));
        }
        Ok(Self {
            contact: ContactWave::new(params.p, params.mu, params.u_minus, 0.0, 1)?,
            rarefaction: SmoothRarefaction::new(params.flux, 0.0, params.u_plus)?,
            params: *params,
        })
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        self.contact.value(t, x) + self.rarefaction.value(t, x)
    }

    pub fn dx(&self, t: f64, x: f64) -> f64 {
        self.contact.dx(t, x) + self.rarefaction.dx(t, x)
    }

    pub fn value_and_dx(&self, t: f64, x: f64) -> (f64, f64) {
        let (rv, rd) = self.rarefaction.value_and_dx(t, x);
        (self.contact.value(t, x) + rv, self.contact.dx(t, x) + rd)
    }

    /// Sample value and derivative on sorted points with one cumulative
    /// contact pass.
    pub fn sample_value_and_dx(&self, t: f64, xs: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let cv = self.contact.sample_values(t, xs);
        let mut values = Vec::with_capacity(xs.len());
        let mut derivs = Vec::with_capacity(xs.len());
        for (i, &x) in xs.iter().enumerate() {
            let (rv, rd) = self.rarefaction.value_and_dx(t, x);
            values.push(cv[i] + rv);
            derivs.push(self.contact.dx(t, x) + rd);
        }
        (values, derivs)
    }
}

/// The remainder by which the approximate asymptotic state fails the
/// conservation law: interaction of the contact and rarefaction pieces
/// plus the viscous cross term. The outer spatial derivative of the
/// viscous bracket is centered-differenced with step `h` applied to the
/// analytic inner expression.
pub fn remainder_fp(state: &TildeU, t: f64, x: f64, h: f64) -> f64 {
    let p = state.params.p;
    let mu = state.params.mu;
    let flux = &state.params.flux;
    let u = state.contact.value(t, x);
    let (ur, dur) = state.rarefaction.value_and_dx(t, x);
    let du = state.contact.dx(t, x);

    let convective = -(flux.deriv(u + ur) - flux.deriv(ur)) * dur - flux.deriv(u + ur) * du;

    let phi_p = |s: f64| s.abs().powf(p - 1.0) * s;
    let bracket = |y: f64| {
        let a = state.contact.dx(t, y);
        let b = state.rarefaction.dx(t, y);
        phi_p(a + b) - phi_p(a)
    };
    let viscous = mu * (bracket(x + h) - bracket(x - h)) / (2.0 * h);

    convective + viscous
}

/// Finite-difference residual of the approximate asymptotic state in the
/// full equation (time derivative by centered differences with the same
/// step). Matches -remainder_fp up to O(h) discretization error.
pub fn tilde_u_residual(state: &TildeU, t: f64, x: f64, h: f64) -> f64 {
    let p = state.params.p;
    let mu = state.params.mu;
    let flux = &state.params.flux;
    let dt_u = (state.value(t + h, x) - state.value(t - h, x)) / (2.0 * h);
    let (v, dv) = state.value_and_dx(t, x);
    let convective = flux.deriv(v) * dv;
    let phi_p = |s: f64| s.abs().powf(p - 1.0) * s;
    let diffusive = mu * (phi_p(state.dx(t, x + h)) - phi_p(state.dx(t, x - h))) / (2.0 * h);
    dt_u + convective - diffusive
}

/// The unique zero crossing of the approximate asymptotic state at time t.
pub fn contact_point_x(state: &TildeU, t: f64, tol: f64) -> Result<f64> {
    let lo = -state.contact.support_edge(t);
    let hi = state.rarefaction.lam_plus() * t + 10.0;
    find_root_expanding(|x| state.value(t, x), lo, hi, tol, 60)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::make_flux;

    fn reduced_params(p: f64, mu: f64, um: f64, up: f64) -> Params {
        Params::new(p, mu, um, up, FluxModel::reduced_quadratic()).unwrap()
    }

    #[test]
    fn constants_p2_closed_forms() {
        let c = selfsimilar_constants(2.0, 1.0, 1.0).unwrap();
        assert!((c.b - 1.0 / 12.0).abs() < 1e-15);
        assert!((c.i_p - 2.0 / 3.0).abs() < 1e-11);
        // independent route: invert the normalization identity with the
        // analytic angular integral 2/3
        let a_identity = (1.0 * (1.0f64 / 12.0).sqrt() / (2.0 * (2.0 / 3.0))).powf(2.0 / 3.0);
        assert!((c.a - a_identity).abs() < 1e-11);
        assert!((c.a - 0.36056239257685).abs() < 1e-9);
        assert!(c.normalization_residual() <= 1e-10);
        assert!((c.support_radius() - 2.0800838).abs() < 1e-6);
    }

    #[test]
    fn constants_identity_across_parameter_grid() {
        for p in [1.2, 1.5, 2.0, 3.0] {
            for mu in [0.5, 1.0, 2.0] {
                for mass in [0.7, 1.0, 2.0] {
                    let c = selfsimilar_constants(p, mu, mass).unwrap();
                    assert!(
                        c.normalization_residual() <= 1e-10,
                        "identity failed at p={p}, mu={mu}, mass={mass}"
                    );
                }
            }
        }
    }

    #[test]
    fn constants_reject_bad_inputs() {
        assert!(selfsimilar_constants(1.0, 1.0, 1.0).is_err());
        assert!(selfsimilar_constants(2.0, 0.0, 1.0).is_err());
        assert!(selfsimilar_constants(2.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn barenblatt_peak_and_support() {
        let c = selfsimilar_constants(2.0, 1.0, 1.0).unwrap();
        // peak at x = 0, tau = 1 equals a^{1/(p-1)} = a
        assert!((barenblatt(&c, 1.0, 0.0) - c.a).abs() < 1e-14);
        // zero beyond the support radius (~2.08 < 3)
        assert_eq!(barenblatt(&c, 1.0, 3.0), 0.0);
        assert!(barenblatt(&c, 1.0, 2.0) > 0.0);
    }

    #[test]
    fn barenblatt_mass_is_conserved() {
        for p in [1.2, 1.5, 2.0, 3.0] {
            let c = selfsimilar_constants(p, 1.0, 1.0).unwrap();
            for t in [0.0_f64, 1.0, 10.0, 100.0] {
                let tau = 1.0 + t;
                let edge = c.support_radius() * tau.powf(1.0 / (p + 1.0));
                let m = quad_value(|x| barenblatt(&c, tau, x), -edge, edge, 1e-10).unwrap();
                assert!((m - 1.0).abs() < 1e-8, "mass {m} at p={p}, t={t}");
            }
        }
    }

    #[test]
    fn barenblatt_solves_porous_medium_equation() {
        // centered-difference residual of d_t v = mu d_x^2(v^p), away from
        // the free boundary
        let h = 1e-4;
        for p in [1.5, 2.0, 3.0] {
            let c = selfsimilar_constants(p, 1.0, 1.0).unwrap();
            for t in [0.0, 1.0, 10.0] {
                let tau: f64 = 1.0 + t;
                let edge = c.support_radius() * tau.powf(1.0 / (p + 1.0));
                for i in 0..40 {
                    let x = -0.9 * edge + 1.8 * edge * i as f64 / 39.0;
                    let dt_v = (barenblatt(&c, tau + h, x) - barenblatt(&c, tau - h, x)) / (2.0 * h);
                    let g = |y: f64| barenblatt(&c, tau, y).powf(p);
                    let dxx = (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h);
                    let res = dt_v - 1.0 * dxx;
                    assert!(res.abs() < 1e-3, "residual {res} at p={p}, t={t}, x={x}");
                }
            }
        }
    }

    #[test]
    fn contact_wave_midpoint_and_far_fields() {
        let w = ContactWave::new(2.0, 1.0, -1.0, 0.0, 0).unwrap();
        // even integrand: half the jump at x = 0
        assert!((w.value(1.0, 0.0) + 0.5).abs() < 1e-11);
        for p in [1.5, 2.0, 3.0] {
            let w = ContactWave::new(p, 1.0, -1.0, 0.0, 0).unwrap();
            let t = 2.0_f64;
            let far = 10.0 * t.powf(1.0 / (p + 1.0));
            assert_eq!(w.value(t, -far), -1.0);
            assert_eq!(w.value(t, far), 0.0);
        }
    }

    #[test]
    fn contact_wave_monotone_and_matches_direct_route() {
        let w = ContactWave::new(2.5, 0.7, -0.4, 0.6, 0).unwrap();
        let t = 3.0;
        let edge = w.support_edge(t);
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=60 {
            let x = -1.2 * edge + 2.4 * edge * i as f64 / 60.0;
            let v = w.value(t, x);
            assert!(v >= prev - 1e-12);
            prev = v;
            let direct = w.value_direct(t, x).unwrap();
            assert!((v - direct).abs() < 1e-8, "angular vs direct at x={x}");
        }
    }

    #[test]
    fn contact_wave_derivative_is_barenblatt() {
        let w = ContactWave::new(2.0, 1.0, -0.5, 0.5, 0).unwrap();
        let t = 4.0_f64;
        let edge = w.support_edge(t);
        let h = 1e-6;
        for i in 0..30 {
            let x = -0.9 * edge + 1.8 * edge * i as f64 / 29.0;
            let fd = (w.value(t, x + h) - w.value(t, x - h)) / (2.0 * h);
            assert!((fd - w.dx(t, x)).abs() < 1e-6);
        }
    }

    #[test]
    fn contact_norm_scaling_lemma_exponents() {
        // || d_x U (t) ||_{L^q} * t^{(q-1)/((p+1)q)} constant in t
        for p in [1.5, 2.0, 3.0] {
            let w = ContactWave::new(p, 1.0, -0.5, 0.5, 0).unwrap();
            for q in [1.0, 2.0, 4.0] {
                let e = (q - 1.0) / ((p + 1.0) * q);
                let base = w.deriv_lq_norm(1.0, q);
                for t in [4.0_f64, 16.0, 64.0] {
                    let v = w.deriv_lq_norm(t, q) * t.powf(e);
                    assert!(
                        (v - base).abs() / base < 5e-3,
                        "scaling broke at p={p}, q={q}, t={t}"
                    );
                }
            }
            // sup norm: value a^{1/(p-1)} t^{-1/(p+1)} (grid max oracle at t=1)
            let linf = w.deriv_lq_norm(1.0, f64::INFINITY);
            let grid_max = (0..20_000)
                .map(|i| w.dx(1.0, -3.0 + 6.0 * i as f64 / 19_999.0))
                .fold(0.0f64, f64::max);
            assert!((linf - grid_max).abs() < 1e-6);
        }
    }

    #[test]
    fn contact_second_derivative_norm_scaling() {
        // admissible (p, q): any q for p <= 2, q < (p-1)/(p-2) for p > 2
        for (p, q) in [(1.5, 1.0), (1.5, 2.0), (2.0, 2.0), (3.0, 1.0), (3.0, 1.5)] {
            let w = ContactWave::new(p, 1.0, -0.5, 0.5, 0).unwrap();
            let e = (2.0 * q - 1.0) / ((p + 1.0) * q);
            let base = w.second_deriv_lq_norm(1.0, q) * 1.0;
            for t in [4.0_f64, 16.0] {
                let v = w.second_deriv_lq_norm(t, q) * t.powf(e);
                assert!(
                    (v - base).abs() / base < 1e-2,
                    "second-derivative scaling broke at p={p}, q={q}, t={t}"
                );
            }
        }
    }

    #[test]
    fn contact_pflux_norm_scaling() {
        for p in [1.5, 2.0, 3.0] {
            let w = ContactWave::new(p, 1.0, -0.5, 0.5, 0).unwrap();
            let e = (2.0 * p + 1.0) / (2.0 * (p + 1.0));
            let base = w.pflux_dx_l2_norm(1.0);
            for t in [4.0_f64, 16.0] {
                let v = w.pflux_dx_l2_norm(t) * t.powf(e);
                assert!((v - base).abs() / base < 1e-2, "p-flux scaling broke at p={p}, t={t}");
            }
        }
    }

    #[test]
    fn contact_sample_values_match_pointwise() {
        let w = ContactWave::new(2.0, 1.0, -0.5, 0.0, 1).unwrap();
        let t = 7.0;
        let xs: Vec<f64> = (0..200).map(|i| -6.0 + 12.0 * i as f64 / 199.0).collect();
        let sampled = w.sample_values(t, &xs);
        for (x, s) in xs.iter().zip(&sampled) {
            assert!((w.value(t, *x) - s).abs() < 1e-9);
        }
    }

    #[test]
    fn exact_rarefaction_fan_values() {
        let f = FluxModel::reduced_quadratic();
        assert!((exact_rarefaction(&f, 0.0, 1.0, 2.0, 1.0).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(exact_rarefaction(&f, 0.0, 1.0, 2.0, -1.0).unwrap(), 0.0);
        assert_eq!(exact_rarefaction(&f, 0.0, 1.0, 2.0, 3.0).unwrap(), 1.0);
        // branch violation
        assert!(exact_rarefaction(&f, -1.0, 1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn smooth_rarefaction_initial_profile() {
        let f = FluxModel::reduced_quadratic();
        let r = SmoothRarefaction::new(f, 0.0, 1.0).unwrap();
        // t = 0, x = 0: tanh 0 = 0 so the speed is the midpoint 0.5
        assert!((r.value(0.0, 0.0) - 0.5).abs() < 1e-12);
        // frozen characteristic solve at t = 1, x = 0 (bisection oracle)
        let x0 = r.char_foot(1.0, 0.0);
        assert!((x0 + 0.3374158071712).abs() < 1e-9);
        let v = r.value(1.0, 0.0);
        assert!((v + x0).abs() < 1e-10); // value = -x0 since x = 0
    }

    #[test]
    fn smooth_rarefaction_bounds_and_monotonicity() {
        let f = FluxModel::reduced_quadratic();
        let r = SmoothRarefaction::new(f, 0.0, 1.0).unwrap();
        // |x0| <= 15 keeps tanh away from f64 saturation so strict bounds
        // are meaningful
        for t in [0.0, 1.0, 10.0] {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..500 {
                let x = -15.0 + (15.0 + t + 15.0) * i as f64 / 499.0;
                let (v, d) = r.value_and_dx(t, x);
                assert!(v > 0.0 && v < 1.0, "bounds violated at t={t}, x={x}");
                assert!(d > 0.0, "derivative not positive at t={t}, x={x}");
                assert!(v >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn smooth_rarefaction_l1_norm_telescopes() {
        let f = FluxModel::reduced_quadratic();
        let r = SmoothRarefaction::new(f, 0.0, 1.0).unwrap();
        for t in [0.0, 1.0, 10.0] {
            // the L1 norm of the derivative of a monotone profile is the jump
            let n1 = r.deriv_lq_norm(t, 1.0);
            assert!((n1 - 1.0).abs() < 1e-8, "L1 norm {n1} at t={t}");
            // sup-norm does not grow
            assert!(r.deriv_linf_norm(t) <= r.deriv_linf_norm(0.0) + 1e-12);
        }
    }

    #[test]
    fn smooth_rarefaction_approaches_exact_fan() {
        let f = FluxModel::reduced_quadratic();
        let r = SmoothRarefaction::new(f, 0.0, 1.0).unwrap();
        let sup_gap = |t: f64| {
            let mut m: f64 = 0.0;
            for i in 0..=4000 {
                let x = -30.0 + (t + 60.0) * i as f64 / 4000.0;
                let gap = (r.value(t, x) - exact_rarefaction(&f, 0.0, 1.0, t, x).unwrap()).abs();
                m = m.max(gap);
            }
            m
        };
        let gaps: Vec<f64> = [1.0, 10.0, 100.0, 1000.0].iter().map(|&t| sup_gap(t)).collect();
        for w in gaps.windows(2) {
            assert!(w[1] < w[0], "sup gap not decreasing: {gaps:?}");
        }
    }

    #[test]
    fn multiwave_reduced_far_fields_and_fan_interior() {
        let params = reduced_params(2.0, 1.0, -0.5, 0.5);
        let mw = Multiwave::new(&params).unwrap();
        let t = 4.0_f64;
        let left = -10.0 * (1.0 + t).powf(1.0 / 3.0);
        assert_eq!(mw.value(t, left).unwrap(), -0.5);
        // inside the fan, far from the contact support: at large t the
        // contact piece contributes ~0 there and the fan gives x/t
        let t = 1.0e4;
        let x = 0.25 * t;
        assert!(mw.contact.support_edge(t) < x);
        let v = mw.value(t, x).unwrap();
        assert!((v - 0.25).abs() < 1e-9, "fan interior value {v}");
    }

    #[test]
    fn multiwave_three_wave_case() {
        let f = make_flux(FluxKind::IntervalDegenerate, -1.0, 0.0, 0.0).unwrap();
        let params = Params::new(2.0, 1.0, -2.0, 1.0, f).unwrap();
        let mw = Multiwave::new(&params).unwrap();
        let t = 50.0;
        // right edge of the right fan: lambda(u_plus) = u_plus - b = 1
        let v = mw.value(t, 1.0 * t).unwrap();
        assert!((v - 1.0).abs() < 1e-6);
        // far left
        let v = mw.value(t, params.flux.deriv(-2.0) * t - 30.0).unwrap();
        assert!((v + 2.0).abs() < 1e-6);
    }

    #[test]
    fn multiwave_rejects_bad_positions() {
        let f = make_flux(FluxKind::IntervalDegenerate, -1.0, 0.0, 0.0).unwrap();
        // both far fields right of the interval: plain rarefaction, not multiwave
        let params = Params::new(2.0, 1.0, 0.5, 1.0, f).unwrap();
        assert!(matches!(Multiwave::new(&params), Err(Error::CaseUnsupported(_))));
    }

    #[test]
    fn tilde_u_values_and_positivity_of_slope() {
        let params = reduced_params(2.0, 1.0, -0.5, 0.5);
        let tu = TildeU::new(&params).unwrap();
        // x -> -inf at t = 0
        assert!((tu.value(0.0, -50.0) - -0.5).abs() < 1e-6);
        // t=0, x=0: contact contributes u_minus/2, fan contributes
        // lambda^{-1}((lam_- + lam_+)/2) = u_plus/2
        let expected = -0.25 + 0.25;
        assert!((tu.value(0.0, 0.0) - expected).abs() < 1e-10);
        for t in [0.0, 1.0, 10.0] {
            for i in 0..10_000 {
                let x = -30.0 + 60.0 * i as f64 / 9_999.0;
                assert!(tu.dx(t, x) >= 0.0);
            }
        }
    }

    #[test]
    fn remainder_matches_equation_residual() {
        for p in [1.5, 2.0, 3.0] {
            let params = reduced_params(p, 1.0, -0.5, 0.5);
            let tu = TildeU::new(&params).unwrap();
            for t in [5.0_f64, 50.0] {
                let h = 1e-5 * (1.0 + t).powf(1.0 / (p + 1.0));
                let edge = tu.contact.support_edge(t);
                let hi = (params.flux.deriv(params.u_plus) * t).max(1.2 * edge) + 2.0;
                let mut checked = 0;
                let mut worst: f64 = 0.0;
                let mut x = -0.88 * edge;
                while checked < 100 {
                    if (x.abs() - edge).abs() > 0.06 * edge {
                        let res = tilde_u_residual(&tu, t, x, h);
                        let fp = remainder_fp(&tu, t, x, h);
                        worst = worst.max((res + fp).abs());
                        checked += 1;
                    }
                    x += (hi + 0.88 * edge) / 110.0;
                }
                assert!(worst <= 10.0 * h, "residual mismatch {worst} at p={p}, t={t}");
            }
        }
    }

    #[test]
    fn remainder_vanishes_far_from_both_waves() {
        let params = reduced_params(2.0, 1.0, -0.5, 0.5);
        let tu = TildeU::new(&params).unwrap();
        let t = 10.0_f64;
        let h = 1e-5 * (1.0 + t).powf(1.0 / 3.0);
        let fp = remainder_fp(&tu, t, -200.0, h);
        assert!(fp.abs() < 1e-12);
    }

    #[test]
    fn contact_point_stays_inside_support_and_converges() {
        for p in [1.5, 2.0, 3.0] {
            let params = reduced_params(p, 1.0, -0.5, 0.5);
            let tu = TildeU::new(&params).unwrap();
            let r = tu.contact.c.support_radius();
            let mut scaled_points = Vec::new();
            for t in [10.0, 100.0, 1000.0, 10_000.0] {
                let x = contact_point_x(&tu, t, 1e-10).unwrap();
                let scaled = x / (1.0 + t).powf(1.0 / (p + 1.0));
                assert!(scaled < r, "upper bound violated at p={p}, t={t}");
                assert!(scaled > 0.0, "crossing left the support at p={p}, t={t}");
                scaled_points.push(scaled);
            }
            // the scaled crossing climbs toward the support edge
            assert!(scaled_points.last().unwrap() > scaled_points.first().unwrap());
            assert!(scaled_points.last().unwrap() > &(0.8 * r));
            // root-finder self-consistency at the example tolerance
            let x = contact_point_x(&tu, 100.0, 1e-8).unwrap();
            assert!(tu.value(100.0, x).abs() < 1e-7);
        }
    }

    #[test]
    fn contact_point_gap_decays_at_lemma_rate() {
        for p in [1.5, 2.0, 3.0] {
            let params = reduced_params(p, 1.0, -0.5, 0.5);
            let tu = TildeU::new(&params).unwrap();
            let r = tu.contact.c.support_radius();
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for k in 0..=8 {
                let t = 100.0 * 10f64.powf(k as f64 / 4.0);
                let x = contact_point_x(&tu, t, 1e-11).unwrap();
                let gap = r - x / (1.0 + t).powf(1.0 / (p + 1.0));
                assert!(gap > 0.0);
                xs.push((1.0 + t).ln());
                ys.push(gap.ln());
            }
            let n = xs.len() as f64;
            let xm = xs.iter().sum::<f64>() / n;
            let ym = ys.iter().sum::<f64>() / n;
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
            let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
            let slope = sxy / sxx;
            let target = -(p - 1.0) / (p + 1.0);
            assert!(slope <= target + 0.1, "gap slope {slope} too shallow at p={p}");
        }
    }
}
