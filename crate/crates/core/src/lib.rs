//! Spectral simulation of hydrogenic ionisation by an intense short pulse in the dipole
//! approximation, with the analytic lower bounds the simulation is checked against.
//!
//! Units: m = 1/2, ħ = 1, e = 1, so the kinetic operator is p² and the hydrogenic ground
//! energy is −Z²/4. Everything is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix `f64`.

// `!(x > 0)` deliberately rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod numerics;
pub mod observables;
pub mod params;
pub mod potential;
pub mod propagator;
pub mod pulse;
pub mod scalar;
pub mod state;

pub use error::{Error, Result};
pub use scalar::{lit, Real, Vec3};

pub type PhysParams64 = params::PhysParams<f64>;
pub type PulseSpec64 = pulse::PulseSpec<f64>;
pub type PulseTables64 = pulse::PulseTables<f64>;
pub type PotentialSpec64 = potential::PotentialSpec<f64>;
pub type GridSpec64 = state::GridSpec<f64>;
pub type Grid64 = state::Grid<f64>;
pub type Wavefunction64 = state::Wavefunction<f64>;
pub type EvolutionPlan64 = propagator::EvolutionPlan<f64>;
pub type DollardSpec64 = propagator::DollardSpec<f64>;
pub type ConeObservable64 = observables::ConeObservable<f64>;
pub type BoundReport64 = bounds::BoundReport<f64>;
pub type Vec3f64 = scalar::Vec3<f64>;

pub type Wavefunction32 = state::Wavefunction<f32>;
pub type PulseTables32 = pulse::PulseTables<f32>;
