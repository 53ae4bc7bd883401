//! Spectral gaps of the one-dimensional periodic Schrödinger operator
//! `−y″ + q(x)y` with a one-periodic real potential.
//!
//! Two independent routes are provided: a Fourier–Galerkin eigenvalue
//! oracle ([`galerkin`]) and asymptotic estimates built directly from the
//! Fourier coefficients of `q` ([`asymptotics`]). The step potential has
//! closed forms in [`kronig_penney`].
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases fix the double-precision types used by the report layer.

mod error;
mod parity;
mod scalar;

pub mod asymptotics;
pub mod eigen;
pub mod experiment;
pub mod galerkin;
pub mod kronig_penney;
pub mod potential;

pub use asymptotics::{AsymptoticEstimate, ConditionKind, SeriesParams};
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, GapReportRow, PotentialSpec};
pub use galerkin::{GalerkinConfig, SpectralPair, SpectralPairTable};
pub use kronig_penney::{GapRate, KpParams};
pub use parity::Parity;
pub use potential::{DerivedCoeffTable, FourierTable, Potential};
pub use scalar::{cis_rational, cis_turns, Scalar, C};

pub type Potential64 = Potential<f64>;
pub type FourierTable64 = FourierTable<f64>;
pub type DerivedCoeffTable64 = DerivedCoeffTable<f64>;
pub type GalerkinConfig64 = GalerkinConfig<f64>;
pub type SpectralPairTable64 = SpectralPairTable<f64>;
pub type AsymptoticEstimate64 = AsymptoticEstimate<f64>;
