//! Moments of a zero-mean diagonal Gaussian conditioned to a centered Euclidean
//! ball, the weak-truncation expansion machinery built on them, and numerical
//! checks of the square correlation inequalities.

pub mod ball;
pub mod error;
pub mod eta;
pub mod expansion;
pub mod moments;
pub mod quadrature;
pub mod report;
pub mod special;
pub mod xi;

pub use ball::{alpha, alpha_1d, alpha_batch, alpha_mc, IntegralValue, MCEstimate, MultiIndex, Spectrum};
pub use error::{Error, Result};
pub use report::{Check, Report, Status};
