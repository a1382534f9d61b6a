//! Pseudospectral laboratory for the damped generalized Korteweg-de Vries-Burgers equation
//!
//! ```text
//! u_t + u_xxx - u_xx + a(u) u_x + b(x) u = 0
//! ```
//!
//! on a periodic truncation of the real line. The crate is generic over the
//! floating point type through [`Real`]; the aliases at the crate root fix it
//! to `f64`, which is what every quoted tolerance assumes.

// `!(x > 0)` is how parameter checks reject NaN along with the bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod carleman;
pub mod diagnostics;
pub mod dynamics;
mod error;
pub mod scalar;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid = spectral::Grid<f64>;
pub type Field = spectral::Field<f64>;
pub type Spectrum = spectral::Spectrum<f64>;
pub type NonlinearitySpec = dynamics::NonlinearitySpec<f64>;
pub type DampingSpec = dynamics::DampingSpec<f64>;
pub type DampingProfile = dynamics::DampingProfile<f64>;
pub type HypReport = dynamics::HypReport<f64>;
pub type SimConfig = solver::SimConfig<f64>;
pub type InitialCondition = solver::InitialCondition<f64>;
pub type Trajectory = solver::Trajectory<f64>;
pub type PicardReport = solver::PicardReport<f64>;
pub type EnergyLedgerEntry = diagnostics::EnergyLedgerEntry<f64>;
pub type DecayFit = diagnostics::DecayFit<f64>;
pub type CarlemanWeight = carleman::CarlemanWeight<f64>;
pub type CoeffSample = carleman::CoeffSample<f64>;
