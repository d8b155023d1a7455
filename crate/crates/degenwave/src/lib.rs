//! degenwave: a numerical laboratory for the one-dimensional scalar
//! conservation law with degenerate p-Laplacian viscosity
//!
//! ```text
//! d_t u + d_x f(u) = mu d_x( |d_x u|^{p-1} d_x u ),   p > 1
//! ```
//!
//! with far-field data u(-inf) = u_minus < u_plus = u(+inf) and a flux that
//! is convex except on a linearly degenerate interval. The crate provides
//!
//! * closed-form asymptotic profiles (Barenblatt source solution, viscous
//!   contact wave, rarefaction fans and their smooth approximations, the
//!   composite multiwave pattern) in [`profiles`],
//! * a conservative monotone finite-volume solver with stability-controlled
//!   explicit time stepping in [`solver`],
//! * discrete norms, power-law rate fitting and diagnostic functionals in
//!   [`analysis`],
//! * an oracle suite binding the closed-form identities and decay rates to
//!   executable checks in [`verify`],
//! * TOML run configurations and CSV schemas in [`config`].

pub mod analysis;
pub mod config;
pub mod error;
pub mod flux;
pub mod grid;
pub mod numerics;
pub mod params;
pub mod profiles;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use flux::{lambda_inverse, make_flux, FluxKind, FluxModel};
pub use grid::{GridFunction, GridSpec};
pub use numerics::{find_root_monotone, quad_compact};
pub use params::Params;

/// Fixed float formatting for every CSV surface: 17 significant digits,
/// scientific notation, byte-stable across runs.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}
