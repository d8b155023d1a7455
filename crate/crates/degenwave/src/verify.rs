//! Executable oracle suite: every closed-form identity and asymptotic
//! property the crate relies on, bound to a pass/fail report. The quick
//! checks run in seconds; the decay suite integrates the canonical
//! experiments and takes minutes.

use crate::analysis::{self, fit_rate};
use crate::config::{canonical_config_text, low_p_config_text, RunConfigFile};
use crate::error::Result;
use crate::flux::FluxModel;
use crate::grid::{GridFunction, GridSpec};
use crate::numerics::quad_value;
use crate::params::Params;
use crate::profiles::{
    barenblatt, contact_point_x, exact_rarefaction, remainder_fp, selfsimilar_constants,
    tilde_u_residual, ContactWave, SmoothRarefaction, TildeU,
};
use crate::solver::{run, RunConfig, Stepper};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const DERIVATIVE_THRESHOLD_P: f64 = 1.2953336454431275; // (7 + sqrt 73) / 12

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl std::fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CheckStatus::Pass => write!(f, "pass"),
            CheckStatus::Fail => write!(f, "fail"),
            CheckStatus::Skipped => write!(f, "skipped"),
        }
    }
}

/// One verified property: pass iff |measured - expected| <= tolerance, or
/// the check-specific predicate recorded in `notes`.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    pub status: CheckStatus,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub notes: String,
}

impl CheckReport {
    fn abs_check(name: String, measured: f64, expected: f64, tolerance: f64, notes: &str) -> Self {
        let status = if (measured - expected).abs() <= tolerance && measured.is_finite() {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Self { name, status, measured, expected, tolerance, notes: notes.into() }
    }

    /// measured must not exceed bound
    fn upper_check(name: String, measured: f64, bound: f64, notes: &str) -> Self {
        let status = if measured <= bound && measured.is_finite() {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Self { name, status, measured, expected: bound, tolerance: 0.0, notes: notes.into() }
    }

    pub fn passed(&self) -> bool {
        self.status != CheckStatus::Fail
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.name,
            self.status,
            crate::fmt_g17(self.measured),
            crate::fmt_g17(self.expected),
            crate::fmt_g17(self.tolerance),
            self.notes.replace(',', ";")
        )
    }
}

// ---------------------------------------------------------------------------
// Closed-form identity checks
// ---------------------------------------------------------------------------

/// Normalization identity of the self-similar constants at relative 1e-9.
pub fn check_constants_identity(p: f64, mu: f64, mass: f64) -> CheckReport {
    let name = format!("constants_identity[p={p},mu={mu},mass={mass}]");
    match selfsimilar_constants(p, mu, mass) {
        Ok(c) => CheckReport::abs_check(name, c.normalization_residual(), 0.0, 1e-9, ""),
        Err(e) => CheckReport {
            name,
            status: CheckStatus::Fail,
            measured: f64::NAN,
            expected: 0.0,
            tolerance: 1e-9,
            notes: e.to_string(),
        },
    }
}

/// Nine parameter combinations with the mass rotated through the grid.
pub fn constants_suite() -> Vec<CheckReport> {
    let ps = [1.2, 2.0, 3.0];
    let mus = [0.5, 1.0, 2.0];
    let masses = [0.7, 1.0, 2.0];
    let mut out = Vec::new();
    for (i, &p) in ps.iter().enumerate() {
        for (j, &mu) in mus.iter().enumerate() {
            let mass = masses[(i + j) % 3];
            out.push(check_constants_identity(p, mu, mass));
        }
    }
    out
}

/// Barenblatt profile: mass conservation at four times and interior
/// porous-medium-equation residual by centered differences.
pub fn check_barenblatt(p: f64, mu: f64, mass: f64) -> Vec<CheckReport> {
    let mut out = Vec::new();
    let c = match selfsimilar_constants(p, mu, mass) {
        Ok(c) => c,
        Err(e) => {
            return vec![CheckReport {
                name: format!("barenblatt[p={p},mu={mu},mass={mass}]"),
                status: CheckStatus::Fail,
                measured: f64::NAN,
                expected: mass,
                tolerance: 1e-8,
                notes: e.to_string(),
            }]
        }
    };
    let mut worst_mass = 0.0f64;
    for t in [0.0, 1.0, 10.0, 100.0] {
        let tau: f64 = 1.0 + t;
        let edge = c.support_radius() * tau.powf(1.0 / (p + 1.0));
        let m = quad_value(|x| barenblatt(&c, tau, x), -edge, edge, 1e-10).unwrap_or(f64::NAN);
        worst_mass = worst_mass.max((m - mass).abs());
    }
    out.push(CheckReport::abs_check(
        format!("barenblatt_mass[p={p},mu={mu},mass={mass}]"),
        worst_mass,
        0.0,
        1e-8,
        "max |integral - mass| over t in {0,1,10,100}",
    ));

    let h = 1e-4;
    let mut worst_res = 0.0f64;
    for t in [0.0, 1.0, 10.0, 100.0] {
        let tau: f64 = 1.0 + t;
        let edge = c.support_radius() * tau.powf(1.0 / (p + 1.0));
        for i in 0..60 {
            // keep 0.1 support radii away from the free boundary
            let x = -0.9 * edge + 1.8 * edge * i as f64 / 59.0;
            let dt_v = (barenblatt(&c, tau + h, x) - barenblatt(&c, tau - h, x)) / (2.0 * h);
            let g = |y: f64| {
                let v = barenblatt(&c, tau, y);
                v.abs().powf(p - 1.0) * v
            };
            let dxx = (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h);
            worst_res = worst_res.max((dt_v - mu * dxx).abs());
        }
    }
    out.push(CheckReport::abs_check(
        format!("barenblatt_pme_residual[p={p},mu={mu},mass={mass}]"),
        worst_res,
        0.0,
        1e-3,
        "centered differences, interior points",
    ));
    out
}

pub fn barenblatt_suite() -> Vec<CheckReport> {
    [(1.2, 0.5, 2.0), (2.0, 1.0, 1.0), (3.0, 2.0, 0.7)]
        .iter()
        .flat_map(|&(p, mu, mass)| check_barenblatt(p, mu, mass))
        .collect()
}

/// Zero-flux solver against the closed form: the contact wave solves the
/// degenerate-diffusion equation exactly and its derivative is the
/// compactly supported self-similar profile. L1 error after integrating
/// from tau = 1 to tau = 4 must drop with observed order >= 0.8 under
/// grid refinement.
pub fn check_solver_barenblatt_convergence(ns: &[usize]) -> CheckReport {
    let p = 2.0;
    let w = ContactWave::new(p, 1.0, -0.5, 0.5, 0).unwrap();
    let mut errors = Vec::new();
    for &n in ns {
        let spec = GridSpec { x_min: -6.0, x_max: 6.0, n };
        let stepper =
            Stepper { flux: FluxModel::zero(), p, mu: 1.0, ghost: (-0.5, 0.5), dx: spec.dx() };
        let xs: Vec<f64> = (0..n).map(|j| spec.cell_center(j)).collect();
        let mut u = w.sample_values(1.0, &xs);
        let mut scratch = vec![0.0; n];
        let mut t = 1.0;
        while t < 4.0 {
            let dt = stepper.stable_dt(&u, 0.4, 4.0 - t);
            stepper.step_into(&u, &mut scratch, dt);
            std::mem::swap(&mut u, &mut scratch);
            t = if 4.0 - t <= dt * (1.0 + 1e-12) { 4.0 } else { t + dt };
        }
        let oracle = w.sample_values(4.0, &xs);
        let l1: f64 = (0..n).map(|j| (u[j] - oracle[j]).abs()).sum::<f64>() * spec.dx();
        errors.push(l1);
    }
    let min_order = errors
        .windows(2)
        .map(|w| (w[0] / w[1]).log2())
        .fold(f64::INFINITY, f64::min);
    CheckReport {
        name: format!("solver_selfsimilar_l1_order[{ns:?}]"),
        status: if min_order >= 0.8 { CheckStatus::Pass } else { CheckStatus::Fail },
        measured: min_order,
        expected: 0.8,
        tolerance: 0.0,
        notes: format!("L1 errors {errors:?}").replace(',', ";"),
    }
}

// ---------------------------------------------------------------------------
// Profile scaling checks
// ---------------------------------------------------------------------------

fn fit_times() -> Vec<f64> {
    (0..12).map(|k| 100.0 * 10f64.powf(k as f64 / 2.75)).collect()
}

/// Fitted slopes of the contact-wave derivative norms against the stated
/// exponents, within 0.01.
pub fn check_contact_norm_scaling(p: f64) -> Vec<CheckReport> {
    let w = ContactWave::new(p, 1.0, -0.5, 0.5, 0).unwrap();
    let times = fit_times();
    let window = (50.0, times.last().unwrap() * 2.0);
    let mut out = Vec::new();

    for q in [1.0, 2.0, 4.0, f64::INFINITY] {
        let values: Vec<f64> = times.iter().map(|&t| w.deriv_lq_norm(t, q)).collect();
        let fit = fit_rate(&times, &values, window).unwrap();
        let expected = if q.is_infinite() { -1.0 / (p + 1.0) } else { -(q - 1.0) / ((p + 1.0) * q) };
        let qname = if q.is_infinite() { "inf".into() } else { format!("{q}") };
        out.push(CheckReport::abs_check(
            format!("contact_dx_norm_slope[p={p},q={qname}]"),
            fit.exponent,
            expected,
            0.01,
            "",
        ));
    }

    let second_qs: &[f64] = if p > 2.0 { &[1.0, 1.5] } else { &[1.0, 2.0] };
    for &q in second_qs {
        let values: Vec<f64> = times.iter().map(|&t| w.second_deriv_lq_norm(t, q)).collect();
        let fit = fit_rate(&times, &values, window).unwrap();
        let expected = -(2.0 * q - 1.0) / ((p + 1.0) * q);
        out.push(CheckReport::abs_check(
            format!("contact_dxx_norm_slope[p={p},q={q}]"),
            fit.exponent,
            expected,
            0.01,
            "angular-variable integration",
        ));
    }

    let values: Vec<f64> = times.iter().map(|&t| w.pflux_dx_l2_norm(t)).collect();
    let fit = fit_rate(&times, &values, window).unwrap();
    out.push(CheckReport::abs_check(
        format!("contact_pflux_dx_l2_slope[p={p}]"),
        fit.exponent,
        -(2.0 * p + 1.0) / (2.0 * (p + 1.0)),
        0.01,
        "",
    ));
    out
}

/// Smoothed-rarefaction norms: scaled boundedness, exact L1 value, sup-norm
/// decay rate, and convergence to the exact fan.
pub fn check_smooth_rarefaction() -> Vec<CheckReport> {
    let flux = FluxModel::reduced_quadratic();
    let r = SmoothRarefaction::new(flux, 0.0, 1.0).unwrap();
    let mut out = Vec::new();

    let decade_times = [1.0, 10.0, 100.0, 1000.0];
    for q in [1.0, 2.0, f64::INFINITY] {
        let scaled: Vec<f64> = decade_times
            .iter()
            .map(|&t| {
                let e = if q.is_infinite() { 1.0 } else { 1.0 - 1.0 / q };
                r.deriv_lq_norm(t, q) * (1.0 + t).powf(e)
            })
            .collect();
        let ratio = scaled.iter().cloned().fold(0.0f64, f64::max)
            / scaled.iter().cloned().fold(f64::INFINITY, f64::min);
        let qname = if q.is_infinite() { "inf".into() } else { format!("{q}") };
        out.push(CheckReport::upper_check(
            format!("rarefaction_dx_norm_bounded[q={qname}]"),
            ratio,
            3.0,
            "max/min of scaled norm over decades in [1, 1e3]",
        ));
    }

    // L1 of the derivative telescopes to the speed jump (= value jump here)
    let worst = decade_times
        .iter()
        .map(|&t| (r.deriv_lq_norm(t, 1.0) - (r.lam_plus() - r.lam_minus())).abs())
        .fold(0.0f64, f64::max);
    out.push(CheckReport::abs_check(
        "rarefaction_dx_l1_exact".into(),
        worst,
        0.0,
        1e-8,
        "monotone profile telescoping",
    ));

    // sup-norm decay ~ (1+t)^{-1}
    let times: Vec<f64> = (0..9).map(|k| 10.0 * 10f64.powf(k as f64 / 4.0)).collect();
    let values: Vec<f64> = times.iter().map(|&t| r.deriv_linf_norm(t)).collect();
    let fit = fit_rate(&times, &values, (5.0, 2e3)).unwrap();
    out.push(CheckReport::abs_check(
        "rarefaction_dx_linf_slope".into(),
        fit.exponent,
        -1.0,
        0.1,
        "",
    ));

    // sup distance to the exact fan decreases
    let sup_gap = |t: f64| {
        let mut m: f64 = 0.0;
        for i in 0..=4000 {
            let x = -30.0 + (t + 60.0) * i as f64 / 4000.0;
            let gap = (r.value(t, x) - exact_rarefaction(&flux, 0.0, 1.0, t, x).unwrap()).abs();
            m = m.max(gap);
        }
        m
    };
    let gaps: Vec<f64> = decade_times.iter().map(|&t| sup_gap(t)).collect();
    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    out.push(CheckReport {
        name: "rarefaction_sup_gap_decreasing".into(),
        status: if monotone { CheckStatus::Pass } else { CheckStatus::Fail },
        measured: gaps[gaps.len() - 1],
        expected: gaps[0],
        tolerance: 0.0,
        notes: format!("gaps {gaps:?}").replace(',', ";"),
    });
    out
}

/// The approximate asymptotic state satisfies the equation up to exactly
/// minus its remainder: finite-difference residual against the closed-form
/// remainder at 100 interior points.
pub fn check_tilde_u_residual() -> Vec<CheckReport> {
    let mut out = Vec::new();
    for p in [1.5, 2.0, 3.0] {
        let params = Params::new(p, 1.0, -0.5, 0.5, FluxModel::reduced_quadratic()).unwrap();
        let state = TildeU::new(&params).unwrap();
        for t in [5.0_f64, 50.0] {
            let h = 1e-5 * (1.0 + t).powf(1.0 / (p + 1.0));
            let edge = state.contact.support_edge(t);
            let hi = (params.flux.deriv(params.u_plus) * t).max(1.2 * edge) + 2.0;
            let step = (hi + 0.88 * edge) / 110.0;
            let mut worst = 0.0f64;
            let mut checked = 0;
            let mut x = -0.88 * edge;
            while checked < 100 {
                if (x.abs() - edge).abs() > 0.06 * edge {
                    let res = tilde_u_residual(&state, t, x, h);
                    let fp = remainder_fp(&state, t, x, h);
                    worst = worst.max((res + fp).abs());
                    checked += 1;
                }
                x += step;
            }
            out.push(CheckReport::abs_check(
                format!("tilde_u_residual[p={p},t={t}]"),
                worst,
                0.0,
                10.0 * h,
                "max |residual + remainder| over 100 interior points",
            ));
        }
    }
    out
}

/// Contact-point asymptotics: the crossing stays inside the support edge
/// and the scaled gap decays at least at the stated rate.
pub fn check_contact_point() -> Vec<CheckReport> {
    let mut out = Vec::new();
    for p in [1.5, 2.0, 3.0] {
        let params = Params::new(p, 1.0, -0.5, 0.5, FluxModel::reduced_quadratic()).unwrap();
        let state = TildeU::new(&params).unwrap();
        let r = state.contact.c.support_radius();
        let mut inside = true;
        let mut ts = Vec::new();
        let mut gaps = Vec::new();
        for k in 0..=12 {
            let t = 10.0 * 10f64.powf(3.0 * k as f64 / 12.0);
            let x = contact_point_x(&state, t, 1e-11).unwrap();
            let scaled = x / (1.0 + t).powf(1.0 / (p + 1.0));
            if scaled >= r || scaled <= 0.0 {
                inside = false;
            }
            ts.push(t);
            gaps.push(r - scaled);
        }
        out.push(CheckReport {
            name: format!("contact_point_bracket[p={p}]"),
            status: if inside { CheckStatus::Pass } else { CheckStatus::Fail },
            measured: gaps[gaps.len() - 1],
            expected: 0.0,
            tolerance: r,
            notes: "0 < X(t) < sqrt(a/b) (1+t)^{1/(p+1)} over t in [10, 1e4]".into(),
        });
        let fit = fit_rate(&ts, &gaps, (50.0, 2e4)).unwrap();
        let target = -(p - 1.0) / (p + 1.0);
        out.push(CheckReport::upper_check(
            format!("contact_point_gap_slope[p={p}]"),
            fit.exponent,
            target + 0.1,
            "scaled gap decay",
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Property suites (seeded randomness)
// ---------------------------------------------------------------------------

pub fn property_suite(seed: u64) -> Vec<CheckReport> {
    let mut out = Vec::new();
    let params = Params::new(2.0, 1.0, -0.5, 0.5, FluxModel::reduced_quadratic()).unwrap();
    let state = TildeU::new(&params).unwrap();

    // G_q >= 0 on 200 random states
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = GridSpec { x_min: -15.0, x_max: 15.0, n: 512 };
        let mut min_g = f64::INFINITY;
        for i in 0..200 {
            let amp: f64 = rng.gen_range(0.01..0.4);
            let freq: f64 = rng.gen_range(0.2..3.0);
            let phase: f64 = rng.gen_range(0.0..6.28);
            let decay: f64 = rng.gen_range(10.0..60.0);
            let t = [0.0, 0.5, 2.0, 10.0][i % 4];
            let phi = GridFunction::sample(spec, |x| {
                amp * (freq * x + phase).sin() * (-(x * x) / decay).exp()
            })
            .unwrap();
            for q in [2.0, 3.0] {
                min_g = min_g.min(analysis::gq_diagnostic(&phi, &state, t, q).unwrap());
            }
        }
        out.push(CheckReport {
            name: "gq_nonnegative[200 random states]".into(),
            status: if min_g >= -1e-13 { CheckStatus::Pass } else { CheckStatus::Fail },
            measured: min_g,
            expected: 0.0,
            tolerance: 1e-13,
            notes: "minimum G_q over random perturbations".into(),
        });
    }

    // interpolation-ratio scale invariance and uniform bound
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let spec = GridSpec { x_min: -20.0, x_max: 20.0, n: 8192 };
        let mut worst_inv = 0.0f64;
        let mut max_ratio = 0.0f64;
        for _ in 0..50 {
            let a1: f64 = rng.gen_range(0.2..2.0);
            let s1: f64 = rng.gen_range(0.8..3.0);
            let c1: f64 = rng.gen_range(-3.0..3.0);
            let f1: f64 = rng.gen_range(0.3..2.0);
            let gen = move |x: f64| {
                a1 * (-((x - c1) / s1).powi(2)).exp() * (1.0 + 0.4 * (f1 * x).sin())
            };
            let phi = GridFunction::sample(spec, gen).unwrap();
            for (p, q) in [(1.5, 2.0), (2.0, 2.0), (2.0, 4.0)] {
                let r0 = analysis::interp_scaling_check(&phi, p, q).unwrap();
                max_ratio = max_ratio.max(r0);
                let phi2 = GridFunction::sample(spec, |x| 1.7 * gen(2.0 * x)).unwrap();
                let r1 = analysis::interp_scaling_check(&phi2, p, q).unwrap();
                worst_inv = worst_inv.max((r1 - r0).abs() / r0);
            }
        }
        out.push(CheckReport::upper_check(
            "interp_ratio_scale_invariant[50 random fields]".into(),
            worst_inv,
            0.01,
            "relative change under phi -> 1.7 phi(2x)",
        ));
        out.push(CheckReport::upper_check(
            "interp_ratio_bounded[50 random fields]".into(),
            max_ratio,
            2.5,
            "uniform Gagliardo-Nirenberg-type bound",
        ));
    }

    // scheme monotonicity on ordered pairs
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcdef);
        let n = 128;
        let stepper = Stepper::from_params(&params, 20.0 / n as f64);
        let mut violations = 0u32;
        for _ in 0..20 {
            let mut u: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let mut v: Vec<f64> =
                u.iter().map(|x| (x + rng.gen_range(0.0..0.2)).min(0.6)).collect();
            let mut bu = vec![0.0; n];
            let mut bv = vec![0.0; n];
            for _ in 0..100 {
                let dt = stepper
                    .stable_dt(&u, 0.4, f64::INFINITY)
                    .min(stepper.stable_dt(&v, 0.4, f64::INFINITY));
                stepper.step_into(&u, &mut bu, dt);
                stepper.step_into(&v, &mut bv, dt);
                std::mem::swap(&mut u, &mut bu);
                std::mem::swap(&mut v, &mut bv);
                if u.iter().zip(&v).any(|(a, b)| a > &(b + 1e-13)) {
                    violations += 1;
                }
            }
        }
        out.push(CheckReport {
            name: "scheme_monotone[20 ordered pairs x 100 steps]".into(),
            status: if violations == 0 { CheckStatus::Pass } else { CheckStatus::Fail },
            measured: violations as f64,
            expected: 0.0,
            tolerance: 0.0,
            notes: "pointwise ordering preserved".into(),
        });
    }

    // per-step conservation telescoping
    {
        let config = decay_config(canonical_config_text());
        let small = RunConfig {
            grid: GridSpec { x_min: -20.0, x_max: 40.0, n: 512 },
            t_end: 1.0,
            snapshot_times: vec![],
            ..config
        };
        let state = crate::solver::initial_data(&small).unwrap();
        let stepper = Stepper::from_params(&small.params, small.grid.dx());
        let mut u = state.u.values;
        let mut outv = vec![0.0; u.len()];
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let dt = stepper.stable_dt(&u, 0.4, f64::INFINITY);
            let rate = stepper.step_into(&u, &mut outv, dt);
            let dmass: f64 =
                u.iter().zip(&outv).map(|(a, b)| b - a).sum::<f64>() * small.grid.dx();
            worst = worst.max((dmass - dt * rate).abs());
            std::mem::swap(&mut u, &mut outv);
        }
        out.push(CheckReport::abs_check(
            "conservation_telescoping[100 steps]".into(),
            worst,
            0.0,
            1e-12,
            "per-step mass change vs boundary fluxes",
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Decay suite
// ---------------------------------------------------------------------------

fn decay_config(text: &str) -> RunConfig {
    RunConfigFile::parse(text).unwrap().build().unwrap()
}

/// The two canonical decay experiments.
pub fn canonical_decay_configs() -> Vec<RunConfig> {
    vec![decay_config(canonical_config_text()), decay_config(low_p_config_text())]
}

/// One decay criterion on one measured column.
#[derive(Debug, Clone)]
pub struct DecayCheck {
    pub column: &'static str,
    pub exponent: f64,
    pub slope_tol: f64,
    pub label: String,
    pub near_threshold: bool,
}

/// Theorem-derived decay checks for a run configuration. The perturbation
/// of the canonical runs is integrable, so both the L2-only rates and the
/// stronger L1-data rates apply; derivative exponents switch at
/// p = (7 + sqrt 73)/12.
pub fn decay_checks_for(config: &RunConfig) -> Vec<DecayCheck> {
    let p = config.params.p;
    let eps = 0.02;
    let mut out = Vec::new();
    let near = (p - DERIVATIVE_THRESHOLD_P).abs() < 0.05;

    if (p - 2.0).abs() < 1e-12 {
        // canonical run: full column set
        for (column, q) in [("l2", 2.0), ("l4", 4.0)] {
            out.push(DecayCheck {
                column,
                exponent: (1.0 - 1.0 / q) / (2.0 * p),
                slope_tol: 0.1,
                label: format!("L{q} with integrable data"),
                near_threshold: false,
            });
            if q > 2.0 {
                out.push(DecayCheck {
                    column,
                    exponent: (1.0 - 2.0 / q) / (3.0 * p + 1.0),
                    slope_tol: 0.1,
                    label: format!("L{q} without integrable data"),
                    near_threshold: false,
                });
            }
        }
        out.push(DecayCheck {
            column: "linf",
            exponent: 1.0 / (2.0 * p) - eps,
            slope_tol: 0.1,
            label: "sup norm with integrable data".into(),
            near_threshold: false,
        });
    }

    // derivative norm, both runs
    let deriv_exp = if p < DERIVATIVE_THRESHOLD_P {
        p / ((p + 1.0) * (p + 1.0))
    } else {
        3.0 / (2.0 * (p + 1.0) * (3.0 * p - 2.0))
    };
    out.push(DecayCheck {
        column: "dxu_lp1",
        exponent: deriv_exp,
        slope_tol: if p < DERIVATIVE_THRESHOLD_P { 0.12 } else { 0.1 },
        label: "gradient L^{p+1}".into(),
        near_threshold: near,
    });

    if let Some(r) = config.r_norm {
        // higher-order derivative norm: three-case exponent
        let exponent = if p >= DERIVATIVE_THRESHOLD_P {
            (p + 2.0 * r) / (2.0 * p * (3.0 * p - 2.0) * (r + 1.0))
        } else if r > (-4.0 * p * p + 7.0 * p + 3.0) / (2.0 * p) {
            (4.0 * p * (r - p) + 7.0 * p + 3.0) / (6.0 * p * (p + 1.0) * (r + 1.0))
        } else {
            r / ((p + 1.0) * (r + 1.0))
        };
        out.push(DecayCheck {
            column: "dxu_lr1",
            exponent,
            slope_tol: 0.1,
            label: format!("gradient L^{}", r + 1.0),
            near_threshold: near,
        });
    }
    out
}

/// Run each configured experiment and test every theorem-derived decay
/// check: envelope (scaled norm grows by at most 1.5x across the window)
/// and fitted slope (at least as steep as the theorem rate minus the
/// tolerance). Runs execute concurrently; each is deterministic.
pub fn run_decay_suite(configs: &[RunConfig]) -> Result<Vec<CheckReport>> {
    let outputs: Vec<_> = configs
        .par_iter()
        .map(|config| run(config).map(|out| (config.clone(), out)))
        .collect::<Result<Vec<_>>>()?;

    let mut reports = Vec::new();
    for (config, out) in outputs {
        let p = config.params.p;
        if out.series.failed {
            reports.push(CheckReport {
                name: format!("decay_run[p={p}]"),
                status: CheckStatus::Fail,
                measured: f64::NAN,
                expected: 0.0,
                tolerance: 0.0,
                notes: "run hit a numerical instability".into(),
            });
            continue;
        }
        let times = out.series.times();
        let window = (config.t_end / 10.0, config.t_end);
        for check in decay_checks_for(&config) {
            let values = out.series.column(check.column).unwrap();
            let name_base = format!("decay[p={p},{}@{:.4}]", check.column, check.exponent);
            if check.near_threshold {
                reports.push(CheckReport {
                    name: format!("{name_base} slope"),
                    status: CheckStatus::Skipped,
                    measured: f64::NAN,
                    expected: -check.exponent,
                    tolerance: check.slope_tol,
                    notes: "p within 0.05 of the derivative-rate threshold; flagged only".into(),
                });
                continue;
            }
            // envelope: ||.|| (1+t)^r at the window end vs start
            let idx1 = times.iter().position(|&t| t >= window.0).unwrap();
            let idx2 = times.len() - 1;
            let env = |i: usize| values[i] * (1.0 + times[i]).powf(check.exponent);
            let ratio = env(idx2) / env(idx1);
            reports.push(CheckReport::upper_check(
                format!("{name_base} envelope"),
                ratio,
                1.5,
                &check.label,
            ));
            let fit = fit_rate(&times, &values, window)?;
            reports.push(CheckReport::upper_check(
                format!("{name_base} slope"),
                fit.exponent,
                -check.exponent + check.slope_tol,
                &format!("{} (r2 = {:.4})", check.label, fit.r2),
            ));
        }
    }
    Ok(reports)
}

/// Everything except the decay suite; runs in well under a minute.
pub fn quick_suite() -> Vec<CheckReport> {
    let mut out = Vec::new();
    out.extend(constants_suite());
    out.extend(barenblatt_suite());
    out.push(check_solver_barenblatt_convergence(&[512, 1024, 2048]));
    for p in [1.5, 2.0, 3.0] {
        out.extend(check_contact_norm_scaling(p));
    }
    out.extend(check_smooth_rarefaction());
    out.extend(check_tilde_u_residual());
    out.extend(check_contact_point());
    out.extend(property_suite(0x00d5_ca1e));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_and_barenblatt_checks_pass() {
        for r in constants_suite() {
            assert!(r.passed(), "{}: {} vs {}", r.name, r.measured, r.expected);
        }
        for r in barenblatt_suite() {
            assert!(r.passed(), "{}: {} vs {}", r.name, r.measured, r.expected);
        }
    }

    #[test]
    fn contact_scaling_checks_pass() {
        for p in [1.5, 2.0, 3.0] {
            for r in check_contact_norm_scaling(p) {
                assert!(r.passed(), "{}: {} vs {}", r.name, r.measured, r.expected);
            }
        }
    }

    #[test]
    fn rarefaction_and_contact_point_checks_pass() {
        for r in check_smooth_rarefaction() {
            assert!(r.passed(), "{}: {} vs {}", r.name, r.measured, r.expected);
        }
        for r in check_contact_point() {
            assert!(r.passed(), "{}: {} vs {}", r.name, r.measured, r.expected);
        }
    }

    #[test]
    fn residual_checks_pass() {
        for r in check_tilde_u_residual() {
            assert!(r.passed(), "{}: {} vs {}", r.name, r.measured, r.expected);
        }
    }

    #[test]
    fn property_checks_pass_and_are_reproducible() {
        let a = property_suite(42);
        let b = property_suite(42);
        for (ra, rb) in a.iter().zip(&b) {
            assert!(ra.passed(), "{}: {} vs {}", ra.name, ra.measured, ra.expected);
            assert_eq!(ra.measured.to_bits(), rb.measured.to_bits(), "{} not reproducible", ra.name);
        }
    }

    #[test]
    fn decay_exponent_table() {
        // threshold and representative exponents, evaluated from the formulas
        assert!((DERIVATIVE_THRESHOLD_P - (7.0 + 73.0f64.sqrt()) / 12.0).abs() < 1e-15);
        let configs = canonical_decay_configs();
        let checks = decay_checks_for(&configs[0]);
        let by_col = |c: &str| {
            checks
                .iter()
                .filter(|k| k.column == c)
                .map(|k| k.exponent)
                .collect::<Vec<_>>()
        };
        assert!((by_col("l2")[0] - 0.125).abs() < 1e-12);
        assert!((by_col("dxu_lp1")[0] - 0.125).abs() < 1e-12);
        assert!((by_col("dxu_lr1")[0] - 0.125).abs() < 1e-12);
        let low = decay_checks_for(&configs[1]);
        let d = low.iter().find(|k| k.column == "dxu_lp1").unwrap();
        assert!((d.exponent - 1.2 / (2.2 * 2.2)).abs() < 1e-12);
        assert!(!d.near_threshold);
    }
}
