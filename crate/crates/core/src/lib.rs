//! Security-capacity simulation library for generalised pre-coded spatial
//! modulation (GPSM) with antenna scrambling.
//!
//! The library is organised in four layers:
//!
//! - [`numerics`]: deterministic stream RNG and the numerically stable
//!   special-function kernels (log-Bessel, noncentral chi-square log-pdf,
//!   log-sum-exp) shared by all estimators.
//! - [`channel`]: MIMOME channel generation (Rayleigh fading, Kronecker
//!   antenna correlation, transmitter-side CSI error) and the matrix kernels
//!   the estimators need (PSD square root, left pseudo-inverse).
//! - [`gpsm`]: the GPSM transceiver itself — receive-antenna activation
//!   patterns, channel-inversion precoding, super-symbol construction for
//!   modulated, circular-scrambled and Gaussian-scrambled payloads, and the
//!   two reference detectors.
//! - [`secrecy`]: likelihood-ratio kernels and Monte Carlo DCMC capacity
//!   estimators for the legitimate receiver and the eavesdropper in every
//!   payload mode, eavesdropper post-processing, security capacity, outage
//!   statistics and a small-instance quadrature oracle.

pub mod channel;
pub mod gpsm;
pub mod numerics;
pub mod secrecy;

use num_complex::Complex;

/// Complex scalar used throughout.
pub type C64 = Complex<f64>;
/// Dynamically sized complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dynamically sized complex column vector.
pub type CVector = nalgebra::DVector<C64>;
/// Dynamically sized real matrix.
pub type RMatrix = nalgebra::DMatrix<f64>;

/// Errors produced by the simulation kernels.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("rank-deficient matrix: {0}")]
    RankDeficient(String),
    #[error("ill-conditioned matrix: {0}")]
    IllConditioned(String),
    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),
}

pub type Result<T> = std::result::Result<T, Error>;
