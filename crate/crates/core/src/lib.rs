//! Bayesian optimization with Gaussian-process and neural-network surrogates.
//!
//! The crate is organised bottom-up:
//!
//! * [`numkit`] dense linear algebra, seeded randomness, Sobol points and
//!   finite differences;
//! * [`mlp`] fully-connected networks with reverse-mode gradients;
//! * [`gp`] exact Gaussian processes with Matérn-5/2, infinite-width network
//!   (NNGP) and deep-kernel feature kernels;
//! * [`bnn`] approximate weight posteriors (HMC, SGHMC, deep ensembles,
//!   linearized Laplace);
//! * [`surrogate`] the common fit / draw contract and the registry of
//!   surrogate strategies selectable by name;
//! * [`acquisition`] Monte-Carlo expected improvement, hypervolume
//!   bookkeeping and acquisition maximization;
//! * [`problems`] the benchmark objective suite.

pub mod acquisition;
pub mod bnn;
pub mod error;
pub mod gp;
pub mod mlp;
pub mod numkit;
pub mod problems;
pub mod surrogate;

pub use error::{Error, Result};
