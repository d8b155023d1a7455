//! Conservative finite-volume integrator: Engquist-Osher upwinding for the
//! convex flux, face-centered difference quotients for the degenerate
//! p-Laplacian diffusion, explicit Euler in time with a stability-controlled
//! step. Dirichlet ghost cells pin the far-field states.

use crate::analysis::{self, Reference};
use crate::error::{Error, Result};
use crate::flux::{FluxKind, FluxModel};
use crate::grid::{GridFunction, GridSpec};
use crate::params::Params;
use crate::profiles::{Multiwave, TildeU};

/// Initial perturbation added on top of the asymptotic state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation {
    None,
    /// amplitude * exp(-((x-center)/width)^2)
    Gaussian { amplitude: f64, center: f64, width: f64 },
    /// compactly supported C^1 cosine bump on [center-width, center+width]
    Bump { amplitude: f64, center: f64, width: f64 },
}

impl Perturbation {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Perturbation::None => 0.0,
            Perturbation::Gaussian { amplitude, center, width } => {
                let s = (x - center) / width;
                amplitude * (-s * s).exp()
            }
            Perturbation::Bump { amplitude, center, width } => {
                let s = (x - center) / width;
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    let c = (std::f64::consts::FRAC_PI_2 * s).cos();
                    amplitude * c * c
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Perturbation::None => Ok(()),
            Perturbation::Gaussian { amplitude, center, width }
            | Perturbation::Bump { amplitude, center, width } => {
                if !amplitude.is_finite() || !center.is_finite() {
                    return Err(Error::InvalidConfig("perturbation fields must be finite".into()));
                }
                if !(width.is_finite() && width > 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "perturbation width must be positive (got {width})"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: Params,
    pub grid: GridSpec,
    pub t_end: f64,
    pub cfl_safety: f64,
    pub snapshot_times: Vec<f64>,
    pub perturbation: Perturbation,
    pub record_every: f64,
    pub reference: Reference,
    /// extra derivative-norm order r (records ||d_x u||_{L^{r+1}})
    pub r_norm: Option<f64>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.grid.n < 16 {
            return Err(Error::InvalidConfig(format!("need n >= 16 cells (got {})", self.grid.n)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::InvalidConfig(format!("need t_end > 0 (got {})", self.t_end)));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "cfl_safety must lie in (0, 1] (got {})",
                self.cfl_safety
            )));
        }
        if !(self.record_every.is_finite() && self.record_every > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "record_every must be positive (got {})",
                self.record_every
            )));
        }
        for w in self.snapshot_times.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidConfig("snapshot_times must be strictly increasing".into()));
            }
        }
        if let Some(&first) = self.snapshot_times.first() {
            if first < 0.0 || self.snapshot_times.last().copied().unwrap() > self.t_end {
                return Err(Error::InvalidConfig("snapshot_times must lie in [0, t_end]".into()));
            }
            if self.reference == Reference::Multiwave && first == 0.0 {
                return Err(Error::InvalidConfig(
                    "multiwave reference is undefined at t = 0; snapshot_times must be positive"
                        .into(),
                ));
            }
        }
        if let Some(r) = self.r_norm {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidConfig(format!("r_norm must be positive (got {r})")));
            }
        }
        if !self.params.is_reduced() {
            return Err(Error::InvalidConfig(
                "runs are defined for the reduced configuration: reduced_quadratic flux with \
                 u_minus < 0 < u_plus (other profiles are available through the profile surface)"
                    .into(),
            ));
        }
        self.perturbation.validate()
    }
}

/// Time-integrator state.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub t: f64,
    pub u: GridFunction,
    pub step_count: u64,
    pub dt_last: f64,
}

/// Low-level stepper: one explicit conservative update over a raw value
/// buffer with prescribed ghost states.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub flux: FluxModel,
    pub p: f64,
    pub mu: f64,
    pub ghost: (f64, f64),
    pub dx: f64,
}

impl Stepper {
    pub fn from_params(params: &Params, dx: f64) -> Self {
        Self {
            flux: params.flux,
            p: params.p,
            mu: params.mu,
            ghost: (params.u_minus, params.u_plus),
            dx,
        }
    }

    /// Engquist-Osher numerical flux for the monotone piecewise-quadratic
    /// family: f(0) + int_0^{u_l} max(f',0) + int_0^{u_r} min(f',0), in
    /// closed form through the endpoints of the zero-speed set.
    pub fn eo_flux(&self, ul: f64, ur: f64) -> f64 {
        let f = &self.flux;
        if f.kind == FluxKind::Zero {
            return 0.0;
        }
        let (s0, s1) = f.zero_speed_interval();
        let plus = if s1 == f64::INFINITY {
            0.0
        } else if s1 == f64::NEG_INFINITY {
            f.eval(ul) - f.eval(0.0)
        } else {
            f.eval(ul.max(s1)) - f.eval(s1.max(0.0))
        };
        let minus = if s0 == f64::NEG_INFINITY {
            0.0
        } else if s0 == f64::INFINITY {
            f.eval(ur) - f.eval(0.0)
        } else {
            f.eval(ur.min(s0)) - f.eval(s0.min(0.0))
        };
        f.eval(0.0) + plus + minus
    }

    /// Degenerate diffusion flux |s|^{p-1} s of a face slope.
    #[inline]
    pub fn diffusion_flux(&self, s: f64) -> f64 {
        if self.p == 2.0 {
            s.abs() * s
        } else {
            s.abs().powf(self.p - 1.0) * s
        }
    }

    /// Largest |f'| over cells and ghosts.
    pub fn max_speed(&self, u: &[f64]) -> f64 {
        let mut m = self.flux.deriv(self.ghost.0).abs().max(self.flux.deriv(self.ghost.1).abs());
        for &v in u {
            m = m.max(self.flux.deriv(v).abs());
        }
        m
    }

    /// Largest |face slope| including the boundary faces.
    pub fn max_slope(&self, u: &[f64]) -> f64 {
        let mut m: f64 = 0.0;
        let mut prev = self.ghost.0;
        for &v in u {
            m = m.max((v - prev).abs());
            prev = v;
        }
        m.max((self.ghost.1 - prev).abs()) / self.dx
    }

    /// Stability bound dt = cfl * min(dx / max|f'|, dx^2 / (2 mu p max|s|^{p-1})),
    /// skipping terms with vanishing denominators; `cap` (the time to the
    /// next record or snapshot) always applies and is the fallback when
    /// both denominators vanish.
    pub fn stable_dt(&self, u: &[f64], cfl_safety: f64, cap: f64) -> f64 {
        let mut dt = f64::INFINITY;
        let speed = self.max_speed(u);
        if speed > 0.0 {
            dt = dt.min(self.dx / speed);
        }
        let slope = self.max_slope(u);
        if slope > 0.0 && self.mu > 0.0 {
            let coeff = 2.0 * self.mu * self.p * slope.powf(self.p - 1.0);
            dt = dt.min(self.dx * self.dx / coeff);
        }
        if dt.is_finite() {
            (cfl_safety * dt).min(cap)
        } else {
            cap
        }
    }

    /// One conservative update of `u` into `out`. Returns the boundary-flux
    /// mass-rate f_left - f_right + mu (d_right - d_left), i.e. d(mass)/dt.
    pub fn step_into(&self, u: &[f64], out: &mut [f64], dt: f64) -> f64 {
        let n = u.len();
        debug_assert_eq!(out.len(), n);
        let lam = dt / self.dx;
        let inv_dx = 1.0 / self.dx;

        let right = |j: usize| if j + 1 == n { self.ghost.1 } else { u[j + 1] };

        let mut f_lo = self.eo_flux(self.ghost.0, u[0]);
        let mut d_lo = self.diffusion_flux((u[0] - self.ghost.0) * inv_dx);
        let (f_left, d_left) = (f_lo, d_lo);
        for j in 0..n {
            let f_hi = self.eo_flux(u[j], right(j));
            let d_hi = self.diffusion_flux((right(j) - u[j]) * inv_dx);
            out[j] = u[j] - lam * (f_hi - f_lo) + self.mu * lam * (d_hi - d_lo);
            f_lo = f_hi;
            d_lo = d_hi;
        }
        f_left - f_lo + self.mu * (d_lo - d_left)
    }
}

/// Stability-bounded time step for a solver state (see `Stepper::stable_dt`);
/// `cap` is the time remaining to the next record or snapshot.
pub fn stable_dt(state: &SolverState, params: &Params, cfl_safety: f64, cap: f64) -> f64 {
    let stepper = Stepper::from_params(params, state.u.dx());
    stepper.stable_dt(&state.u.values, cfl_safety, cap)
}

/// One explicit step (allocating variant used by tests; `run` drives the
/// stepper over reused buffers).
pub fn step(state: &SolverState, params: &Params, dt: f64) -> Result<SolverState> {
    let stepper = Stepper::from_params(params, state.u.dx());
    let mut out = vec![0.0; state.u.n()];
    stepper.step_into(&state.u.values, &mut out, dt);
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Instability {
            t: state.t,
            step: state.step_count + 1,
            reason: "non-finite value after explicit step".into(),
        });
    }
    Ok(SolverState {
        t: state.t + dt,
        u: GridFunction::new(state.u.spec(), out)?,
        step_count: state.step_count + 1,
        dt_last: dt,
    })
}

/// Sample the initial datum u0 = (asymptotic state at t=0) + perturbation.
///
/// Fails with DomainTooSmall unless the variation support of the asymptotic
/// state at t_end (left contact edge and right fan edge, whichever is
/// wider) fits inside the domain with a 5-cell margin.
pub fn initial_data(config: &RunConfig) -> Result<SolverState> {
    config.validate()?;
    let tilde_u = TildeU::new(&config.params)?;
    check_domain(config, &tilde_u)?;
    let spec = config.grid;
    let xs: Vec<f64> = (0..spec.n).map(|j| spec.cell_center(j)).collect();
    let (base, _) = tilde_u.sample_value_and_dx(0.0, &xs);
    let values: Vec<f64> =
        xs.iter().zip(&base).map(|(&x, &b)| b + config.perturbation.eval(x)).collect();
    Ok(SolverState {
        t: 0.0,
        u: GridFunction::new(spec, values)?,
        step_count: 0,
        dt_last: 0.0,
    })
}

fn check_domain(config: &RunConfig, tilde_u: &TildeU) -> Result<()> {
    let margin = 5.0 * config.grid.dx();
    let contact_edge = tilde_u.contact.support_edge(config.t_end);
    let fan_edge = config.params.flux.deriv(config.params.u_plus) * config.t_end;
    let left_req = -contact_edge;
    let right_req = fan_edge.max(contact_edge);
    if left_req < config.grid.x_min + margin || right_req > config.grid.x_max - margin {
        return Err(Error::DomainTooSmall(format!(
            "asymptotic-state support [{left_req:.3}, {right_req:.3}] at t_end = {} exceeds \
             domain [{}, {}] minus a 5-cell margin",
            config.t_end, config.grid.x_min, config.grid.x_max
        )));
    }
    Ok(())
}

/// One record of the measured norm time series.
#[derive(Debug, Clone, Copy)]
pub struct NormRecord {
    pub t: f64,
    pub l1: f64,
    pub l2: f64,
    pub l4: f64,
    pub linf: f64,
    pub dxu_lp1: f64,
    pub dxphi_lp1: f64,
    pub dxu_lr1: f64,
    pub gq2: f64,
    pub mass: f64,
}

/// Measured norm time series of a run. `boundary_flux_integral` carries the
/// accumulated boundary mass flux at each record (diagnostic, not part of
/// the CSV schema); `failed` marks a partial series cut short by a
/// numerical instability.
#[derive(Debug, Clone, Default)]
pub struct NormSeries {
    pub records: Vec<NormRecord>,
    pub boundary_flux_integral: Vec<f64>,
    pub failed: bool,
}

impl NormSeries {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let get: fn(&NormRecord) -> f64 = match name {
            "l1" => |r| r.l1,
            "l2" => |r| r.l2,
            "l4" => |r| r.l4,
            "linf" => |r| r.linf,
            "dxu_lp1" => |r| r.dxu_lp1,
            "dxphi_lp1" => |r| r.dxphi_lp1,
            "dxu_lr1" => |r| r.dxu_lr1,
            "gq2" => |r| r.gq2,
            "mass" => |r| r.mass,
            _ => return None,
        };
        Some(self.records.iter().map(get).collect())
    }
}

/// Field snapshot at one requested time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub reference: Vec<f64>,
    pub phi: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series: NormSeries,
    pub snapshots: Vec<Snapshot>,
    pub final_state: SolverState,
    /// true if some value left the expected range (warning, not failure)
    pub range_warning: bool,
}

/// Integrate the configured problem from 0 to t_end, recording perturbation
/// norms at every multiple of `record_every` and field snapshots at the
/// requested times. Deterministic for a fixed config.
///
/// The G_q diagnostic is always measured against the approximate asymptotic
/// state (its defining decomposition), independently of the reference used
/// for the perturbation columns.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let params = &config.params;
    let tilde_u = TildeU::new(params)?;
    let multiwave = match config.reference {
        Reference::Multiwave => Some(Multiwave::new(params)?),
        Reference::TildeU => None,
    };

    let mut state = initial_data(config)?;
    let spec = config.grid;
    let xs: Vec<f64> = (0..spec.n).map(|j| spec.cell_center(j)).collect();
    let stepper = Stepper::from_params(params, spec.dx());

    // range guard (warning threshold only)
    let du = params.mass();
    let u0_min = state.u.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let u0_max = state.u.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo_guard = params.u_minus.min(u0_min) - 0.1 * du;
    let hi_guard = params.u_plus.max(u0_max) + 0.1 * du;

    // event times: record multiples, snapshots, t_end
    let mut events: Vec<f64> = Vec::new();
    let mut k = 0u64;
    loop {
        let t = k as f64 * config.record_every;
        if t > config.t_end + 1e-12 * config.t_end {
            break;
        }
        events.push(t.min(config.t_end));
        k += 1;
    }
    events.extend(config.snapshot_times.iter().copied());
    events.push(config.t_end);
    events.sort_by(|a, b| a.partial_cmp(b).unwrap());
    events.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * config.t_end.max(1.0));

    let mut series = NormSeries::default();
    let mut snapshots = Vec::new();
    let mut range_warning = false;
    let mut boundary_acc = 0.0;
    let mut scratch = vec![0.0; spec.n];

    let is_record_time = |t: f64| {
        let k = (t / config.record_every).round();
        (t - k * config.record_every).abs() <= 1e-9 * config.t_end.max(1.0)
    };
    let is_snapshot_time =
        |t: f64| config.snapshot_times.iter().any(|&s| (s - t).abs() <= 1e-9 * config.t_end.max(1.0));

    let record = |state: &SolverState,
                  series: &mut NormSeries,
                  snapshots: &mut Vec<Snapshot>,
                  boundary_acc: f64|
     -> Result<()> {
        let t = state.t;
        let take_record = is_record_time(t) || t == config.t_end;
        let take_snapshot = is_snapshot_time(t);
        if !take_record && !take_snapshot {
            return Ok(());
        }
        // asymptotic-state samples are always needed (G_q)
        let (tu_vals, _tu_dx) = tilde_u.sample_value_and_dx(t, &xs);
        let reference_vals: Vec<f64> = match (&multiwave, config.reference) {
            (_, Reference::TildeU) => tu_vals.clone(),
            (Some(mw), Reference::Multiwave) => {
                if t <= 0.0 {
                    return Ok(()); // multiwave reference undefined at t = 0
                }
                xs.iter().map(|&x| mw.value(t, x)).collect::<Result<Vec<f64>>>()?
            }
            _ => unreachable!(),
        };
        let phi_vals: Vec<f64> =
            state.u.values.iter().zip(&reference_vals).map(|(u, r)| u - r).collect();

        if take_record {
            let phi = GridFunction::new(spec, phi_vals.clone())?;
            let phi_tilde = GridFunction::new(
                spec,
                state.u.values.iter().zip(&tu_vals).map(|(u, r)| u - r).collect(),
            )?;
            let dxu_lr1 = match config.r_norm {
                Some(r) => analysis::deriv_lq_norm(&state.u, r + 1.0)?,
                None => f64::NAN,
            };
            series.records.push(NormRecord {
                t,
                l1: analysis::lq_norm(&phi, 1.0)?,
                l2: analysis::lq_norm(&phi, 2.0)?,
                l4: analysis::lq_norm(&phi, 4.0)?,
                linf: analysis::linf_norm(&phi),
                dxu_lp1: analysis::deriv_lq_norm(&state.u, params.p + 1.0)?,
                dxphi_lp1: analysis::deriv_lq_norm(&phi, params.p + 1.0)?,
                dxu_lr1,
                gq2: analysis::gq_diagnostic(&phi_tilde, &tilde_u, t, 2.0)?,
                mass: state.u.values.iter().sum::<f64>() * spec.dx(),
            });
            series.boundary_flux_integral.push(boundary_acc);
        }
        if take_snapshot {
            snapshots.push(Snapshot {
                t,
                x: xs.clone(),
                u: state.u.values.clone(),
                reference: reference_vals,
                phi: phi_vals,
            });
        }
        Ok(())
    };

    record(&state, &mut series, &mut snapshots, boundary_acc)?;

    let mut next_event_idx = events.iter().position(|&e| e > 0.0).unwrap_or(events.len());
    while state.t < config.t_end && next_event_idx < events.len() {
        let target = events[next_event_idx];
        while state.t < target {
            let cap = target - state.t;
            let dt = stepper.stable_dt(&state.u.values, config.cfl_safety, cap);
            let rate = stepper.step_into(&state.u.values, &mut scratch, dt);
            boundary_acc += dt * rate;
            if scratch.iter().any(|v| !v.is_finite()) {
                series.failed = true;
                return Ok(RunOutput {
                    series,
                    snapshots,
                    final_state: state,
                    range_warning,
                });
            }
            std::mem::swap(&mut state.u.values, &mut scratch);
            state.step_count += 1;
            state.dt_last = dt;
            state.t = if cap <= dt + f64::EPSILON { target } else { state.t + dt };
        }
        if !range_warning
            && state.u.values.iter().any(|&v| v < lo_guard || v > hi_guard)
        {
            range_warning = true;
        }
        record(&state, &mut series, &mut snapshots, boundary_acc)?;
        next_event_idx += 1;
    }

    Ok(RunOutput { series, snapshots, final_state: state, range_warning })
}
