//! Small-time at-the-money asymptotics for exponential Levy models.
//!
//! The library is organised around the pipeline
//!
//! * [`levy`] — triplets `(b, sigma, nu)`, characteristic exponents,
//!   martingale calibration, Esscher (share-measure) transforms and cached
//!   tail functionals `gamma`, `V`, `U`, `mu`;
//! * [`regvar`] — regular-variation diagnostics and the scaling function
//!   `B_t` (tail-variance bisection, de Bruijn inversion, closed forms);
//! * [`stable`] — the limiting stable laws: characteristic function, tail
//!   probabilities, expected positive part, exact simulation;
//! * [`pricing`] — Fourier ATM call prices, Monte Carlo cross-checks,
//!   Black–Scholes round trips and first-order predictions;
//! * [`verify`] — assumption checks, concentration bounds and convergence
//!   studies, each returning a serialisable report.

pub mod cf;
pub mod error;
pub mod interp;
pub mod levy;
pub mod mc;
pub mod osc;
pub mod preset;
pub mod pricing;
pub mod quad;
pub mod regvar;
pub mod special;
pub mod stable;

pub use error::{Error, Result};
