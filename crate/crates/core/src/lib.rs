//! Numerical kernels for Littlewood-Paley theory on the torus and the line.
//!
//! Everything in this crate is a pure function of immutable inputs and runs
//! without `std`: sampled fields and their spectra, semigroup kernels and
//! symbols, g-functions, dyadic square functions, sharp and Carleson maximal
//! functions, vector-valued multipliers with their transference experiments,
//! the extremal families that force best-constant growth, and the ratio
//! curves and exponent fits that summarize them.
//!
//! Fields are sampled on a uniform grid. A torus field lives on the period-1
//! cube `[-1/2, 1/2)^d` with normalized Haar measure; a line field lives on a
//! period-`L` cube that stands in for `R^d`. Fourier coefficients follow the
//! synthesis convention `f(x) = sum_m c_m e^{2 pi i m.x / L}`.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
mod fft;

pub mod dyadic;
pub mod estimate;
pub mod extremal;
pub mod field;
pub mod kernels;
pub mod maximal;
pub mod quad;
pub mod random;
pub mod sqfun;
pub mod transference;

pub use error::{Error, Result};
pub use fft::Fft;
pub use field::{Domain, DomainKind, FourierSpectrum, SampledField};
pub use quad::LogTimeGrid;

pub use num_complex::Complex64;

/// `2 pi`, used throughout in symbol exponents.
pub(crate) const TAU: f64 = core::f64::consts::TAU;
