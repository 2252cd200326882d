//! Numerical laboratory for a wireless-powered dual-hop amplify-and-forward
//! relay with `N` relay antennas, a power-splitting energy-harvesting
//! receiver, and (optionally) a single dominant co-channel interferer.
//!
//! The crate evaluates the same quantities two independent ways:
//!
//! * **Analysis** ([`analysis`], [`optimum`]): closed-form and
//!   single-integral expressions for exact outage, outage lower bounds,
//!   high-SNR outage approximations, ergodic-capacity upper bounds, and the
//!   outage-optimal power-splitting ratio, for the noise-limited system and
//!   three relay combining schemes (MRC/MRT, ZF/MRT, MMSE/MRT).
//! * **Simulation** ([`mc`]): seeded, reproducible, parallel Monte Carlo of
//!   the exact per-draw SINRs defined in [`schemes`].
//!
//! All powers are linear SNRs normalized to unit noise power; dB conversion
//! is a front-end concern. The special-function kernel in [`specfun`] and
//! the adaptive quadrature in [`quad`] are self-contained.

pub mod analysis;
pub mod mc;
pub mod model;
pub mod optimum;
pub mod quad;
pub mod schemes;
pub mod specfun;

pub use model::{ChannelDraw, RngStream, SystemParams};
pub use schemes::{Scheme, SinrDecomposition};

use std::fmt;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Argument outside a function's domain.
    Domain {
        func: &'static str,
        detail: String,
    },
    /// A series or iteration failed to reach the requested tolerance; carries
    /// the tolerance actually achieved and the best estimate.
    Convergence {
        func: &'static str,
        achieved: f64,
        estimate: f64,
    },
    /// Adaptive quadrature ran out of subdivisions; carries the estimate so
    /// far and its error bound.
    Quadrature {
        estimate: f64,
        abs_error: f64,
    },
    /// Parameter combination on which the closed forms are singular
    /// (equal effective per-branch SNR scales, see the analysis module).
    DegenerateParams(String),
    /// Scheme/parameter combination that is not defined (e.g. ZF/MRT with a
    /// single antenna).
    SchemeUnsupported(String),
    /// Root bracketing failed: no sign change of the optimality condition on
    /// the search interval.
    BracketFailure(String),
    /// System parameters violate their range constraints.
    InvalidParams(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { func, detail } => write!(f, "{func}: domain error: {detail}"),
            Error::Convergence {
                func,
                achieved,
                estimate,
            } => write!(
                f,
                "{func}: failed to converge (achieved rel. tol. {achieved:.3e}, estimate {estimate:.6e})"
            ),
            Error::Quadrature {
                estimate,
                abs_error,
            } => write!(
                f,
                "quadrature did not converge (estimate {estimate:.6e}, abs. error {abs_error:.3e})"
            ),
            Error::DegenerateParams(msg) => write!(f, "degenerate parameters: {msg}"),
            Error::SchemeUnsupported(msg) => write!(f, "unsupported scheme: {msg}"),
            Error::BracketFailure(msg) => write!(f, "bracketing failure: {msg}"),
            Error::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
