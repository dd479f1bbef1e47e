//! Exact stationary analysis of a finite single-server queue with
//! deterministic service and a renovation drop mechanism, a RED-style
//! M/M/1/K consecutive-loss model, a discrete-event simulator used as an
//! oracle for both, and a search for renovation vectors that hit
//! performance targets.

pub mod analysis;
pub mod calibrate;
pub mod chain;
pub mod cli;
pub mod error;
pub mod loss;
pub mod model;
pub mod quadrature;
pub mod red;
pub mod sim;
pub mod stationary;

pub use analysis::{analyze, Analysis};
pub use error::{Error, Result};
pub use model::{ModelParams, PoissonKernel, Resolution};
