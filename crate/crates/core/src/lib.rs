//! Non-asymptotic bounds on the expected maximum of i.i.d. Gaussians and of
//! i.i.d. symmetric random walks, together with the exact reference values
//! needed to check them.
//!
//! The crate is `no_std` (it needs `alloc`) and is organised bottom-up:
//!
//! - [`special`]: normal density and tails, Mill's ratio and Boyd's lower
//!   bounds, Robbins' factorial brackets, Bernoulli KL divergence, the `psi`
//!   correction function and sub-Gaussian MGF margins.
//! - [`tails`]: lower bounds on Gaussian and fair-binomial tails, and the
//!   exact binomial tail.
//! - [`extreme`]: closed-form lower and upper bounds on `E[max]` and the
//!   expert-advice regret bounds derived from them.
//! - [`oracles`]: exact `E[max]` by quadrature (Gaussian) and by CDF powers
//!   (walks), plus seeded Monte Carlo estimates.
//! - [`experts`]: loss matrices, the exponential-weights learner and regret
//!   measurement under random fair-coin losses.
//!
//! Everything is deterministic. Monte Carlo routines take an explicit seed.
#![no_std]
// Frozen reference values and quadrature nodes keep every published digit.
#![allow(clippy::excessive_precision)]

extern crate alloc;
#[cfg(test)]
#[macro_use]
extern crate std;

mod error;
pub mod experts;
pub mod extreme;
pub mod grid;
pub mod oracles;
pub mod quadrature;
pub mod special;
pub mod tails;

pub use error::{Error, Hypothesis, Result};
pub use extreme::{EnsembleSize, EnsembleSpec, Family};
pub use grid::RealGrid;
pub use oracles::MonteCarloEstimate;
