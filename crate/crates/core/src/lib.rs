//! Spectral simulation of the fractional stochastic heat equation and
//! Monte Carlo verification of drift-parameter estimators.
//!
//! The solution is represented through its first `N` Fourier modes, each an
//! Ornstein-Uhlenbeck process simulated exactly on a uniform grid.

pub mod dump;
pub mod error;
pub mod estimators;
pub mod montecarlo;
pub mod ou_sim;
pub mod rng;
pub mod spectrum;
pub mod summation;
pub mod theory;

pub use error::{Error, Result};
pub use estimators::{EstimateRecord, EstimatorKind};
pub use ou_sim::{PathForm, PathMatrix, SimOptions, TimeGrid};
pub use rng::SeedPolicy;
pub use spectrum::{EigenRule, SpectralModel};
