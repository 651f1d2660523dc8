//! Nonclassicality quasiprobabilities from balanced homodyne data.
//!
//! The pipeline goes from quadrature samples to an empirical characteristic function
//! with per-point variances ([`charfunc`]), multiplies it by a nonclassicality filter
//! ([`filters`]), and inverts the filtered function by a Hankel transform to get the
//! radial quasiprobability with its standard deviation ([`quasiprob`]). A negative
//! value many standard deviations below zero certifies nonclassical light.
//!
//! [`spats`] holds the test state, a lossy single-photon-added thermal state, with its
//! exact density, sampler and characteristic function. [`analysis`] builds the
//! significance, width tuning, hard-cutoff comparison and efficiency sweeps on top.
//! The `nonclassical` binary wraps all of it ([`cli`]).
//!
//! Runnable examples (`cargo run --release --example <name>`):
//!
//! - `simulate_dataset` draws samples and checks the moments
//! - `characteristic_function` compares the estimate with theory
//! - `filter_axioms` checks the filter requirements for three filters
//! - `quasiprobability_profile` reconstructs P_Ω with error bars
//! - `width_scan` tunes the filter width
//! - `rectangular_cutoff` shows why a hard cutoff fails
//! - `efficiency_sweep` maps significance against detection efficiency
//! - `loss_rescaling` checks the loss scaling identity
//!
//! ```
//! use nonclassical::analysis::{reconstruct, significance};
//! use nonclassical::filters::build_autocorrelation_filter;
//! use nonclassical::quasiprob::default_alpha_grid;
//! use nonclassical::spats::{sample_quadratures, SpatsParams};
//!
//! let data = sample_quadratures(&SpatsParams::new(0.49, 0.62)?, 20_000, 1)?;
//! let filter = build_autocorrelation_filter(1.4)?;
//! let profile = reconstruct(&data, &filter, &default_alpha_grid())?;
//! assert!(significance(&profile)?.s_min < 0.0);
//! # Ok::<(), nonclassical::error::Error>(())
//! ```

pub mod analysis;
pub mod bessel;
pub mod charfunc;
pub mod cli;
pub mod error;
pub mod filters;
pub mod io;
pub mod quadrature;
pub mod quasiprob;
pub mod spats;
