//! Variance-reduced stochastic gradient solvers for finite-sum empirical risk
//! minimization, with random reshuffling as a first-class sampling scheme.
//!
//! The crate is `no_std` (it needs `alloc`) and holds only pure numerics:
//!
//! - [`model`]: per-sample losses, gradients and curvature constants
//! - [`data`]: samples, datasets, unit normalization and synthetic generation
//! - [`sampling`]: the pinned pseudo-random stream, permutations, bounded draws
//! - [`solvers`]: SGD, SAGA, SVRG and AVRG epoch runners plus the multi-epoch driver
//! - [`analysis`]: reference minimizer, convergence metrics, rate constants, energy
//! - [`verify`]: replay-based Monte Carlo and enumeration checks of the history-table
//!   distribution, moment identities and estimator bias
//!
//! File formats, trace serialization and the command-line front end live in the
//! companion `rrvr` crate.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analysis;
pub mod data;
pub mod error;
pub mod linalg;
pub mod model;
pub mod sampling;
pub mod solvers;
pub mod stats;
pub mod verify;

pub use data::{Dataset, Sample};
pub use error::{Error, Result};
pub use linalg::Weights;
pub use model::{CurvatureConstants, LossKind, LossModel};
pub use sampling::{Permutation, RngStream};
