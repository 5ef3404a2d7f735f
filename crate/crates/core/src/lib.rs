//! Fast inverse and forward nonlinear Fourier transforms for the focusing
//! Zakharov-Shabat scattering problem.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`] and [`spectrum`] hold the shared domain types.
//! * [`polyops`] provides FFT-backed polynomial and polynomial-matrix
//!   arithmetic, including balanced-tree cumulative products.
//! * [`forward`] implements discrete forward scattering with the
//!   trapezoidal rule and exponential implicit Adams schemes.
//! * [`layerpeel`] inverts discrete scattering data, sequentially or with
//!   the divide-and-conquer fast variant.
//! * [`synthesis`] builds layer-peeling input from a bandlimited
//!   reflection coefficient.
//! * [`darboux`] adds bound states and runs the full two-step inverse.
//! * [`domain`] estimates computational windows.
//! * [`signals`] has the closed-form test spectra and error metrics.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod darboux;
pub mod domain;
pub mod error;
pub mod forward;
pub mod grid;
pub mod layerpeel;
pub mod polyops;
pub mod signals;
mod quad;
pub mod special;
pub mod spectrum;
pub mod synthesis;

pub use error::{Error, Result};
pub use grid::{JostPolynomialPair, SampledPotential, TimeGrid};
pub use num_complex::Complex64;
pub use spectrum::{BoundState, ContinuousSpectrum, DiscreteSpectrum, NFSpectrum};

/// Execution mode for operations that have both an O(N^2) reference path
/// and a fast divide-and-conquer path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Sequential,
    Fast,
}
