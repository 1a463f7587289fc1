//! Simulation and bootstrap-based bias correction of persistence measures
//! for long-memory (ARFIMA) time series.
//!
//! The crate covers the full workflow:
//!
//! * [`fracdiff`] — fractional difference filters `(1-z)^d` and the Fisher-z
//!   transform pair;
//! * [`arfima`] — exact theoretical autocovariances (Sowell's closed form with
//!   the Doornik–Ooms evaluation), autocorrelations and impulse responses of
//!   an ARFIMA(p,d,0) process;
//! * [`simulate`] — exact Gaussian sampling from an autocovariance sequence by
//!   the Durbin–Levinson recursion, with a reproducible seeding contract;
//! * [`arfit`] — autoregressive approximation: Burg and Yule–Walker fitting,
//!   AIC order selection, AR inversion, implied ACFs, and Schur–Cohn
//!   stability testing/repair;
//! * [`estimators`] — the sample ACF (Pearson and segment-mean forms), the
//!   semi-parametric sample IRF, and the local Whittle estimator of `d`;
//! * [`sieve`] — raw and pre-filtered sieve bootstrap resamplers, reference
//!   values, bootstrap distributions, direct bias adjustment and a
//!   Kilian-style coefficient-space correction;
//! * [`analytic_bias`] — Hosking's asymptotic ACF bias and the Marriott–Pope
//!   O(1/T) expectation of the sample autocorrelation, evaluated exactly
//!   under Gaussianity;
//! * [`harness`] — Monte Carlo experiment runner, kernel density estimates,
//!   and CSV emission for tables, figure panels and lag profiles.

pub mod analytic_bias;
pub mod arfima;
pub mod arfit;
pub mod error;
pub mod estimators;
pub mod fracdiff;
pub mod harness;
pub mod rng;
pub mod sieve;
pub mod simulate;

pub use error::{Error, Result};
