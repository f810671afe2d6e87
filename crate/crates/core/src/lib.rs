//! Decision engine for flexibly-bounded rationality.
//!
//! - [`data`]: datasets with an explicit missingness mask, CSV ingestion,
//!   min-max normalization and seeded splits.
//! - [`signal`]: FFT, STFT and Haar features.
//! - [`neural`]: MLP with backpropagation, also used as an autoassociative net.
//! - [`evolve`]: real-coded genetic algorithm.
//! - [`imputation`]: correlation-machine and baseline imputers.
//! - [`rationality`]: rationality and information power ratios, satisficing verdicts.
//! - [`utility`]: expected-utility choice.
//! - [`pipeline`]: bounded vs flexibly-bounded end-to-end runs.
//! - [`persist`]: JSON model files.

pub mod data;
pub mod error;
pub mod evolve;
pub mod imputation;
pub mod neural;
pub mod persist;
pub mod pipeline;
pub mod rationality;
pub mod seed;
pub mod signal;
pub mod utility;

pub use error::{Error, ErrorClass, Result};
