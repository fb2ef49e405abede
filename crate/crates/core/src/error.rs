//! Error type shared by the library modules.

use alloc::string::String;
use core::fmt;

/// Validation / contract failures raised by the library.
///
/// Numerical blow-ups during time stepping are reported separately through
/// [`crate::timestepping::SimAbort`] so the failing state can be dumped.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Bad grid construction (size, half-period).
    Grid(String),
    /// Physical or regularization parameters out of their admissible range.
    Params(String),
    /// Spectral contract violation (non-Hermitian data, symbol range).
    Spectral(String),
    /// Quadrature configuration or convergence problem.
    Quadrature(String),
    /// Series evaluation outside its convergence region.
    Series(String),
    /// Initial-data profile construction failure.
    Profile(String),
    /// A computation produced non-finite samples.
    NonFinite(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Grid(m) => write!(f, "grid: {m}"),
            Error::Params(m) => write!(f, "params: {m}"),
            Error::Spectral(m) => write!(f, "spectral: {m}"),
            Error::Quadrature(m) => write!(f, "quadrature: {m}"),
            Error::Series(m) => write!(f, "series: {m}"),
            Error::Profile(m) => write!(f, "profile: {m}"),
            Error::NonFinite(m) => write!(f, "non-finite: {m}"),
        }
    }
}

impl core::error::Error for Error {}
