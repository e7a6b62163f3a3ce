//! File formats, experiment orchestration and the command-line front end for
//! [`rrvr_core`].

pub mod checks;
pub mod error;
pub mod experiment;
pub mod libsvm;
pub mod trace;

pub use error::{Error, Result};
