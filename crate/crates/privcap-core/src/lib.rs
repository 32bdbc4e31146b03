//! Numerical laboratory for a family of random-unitary qudit channels:
//! exact second-moment (twirl) algebra, Monte Carlo estimation, and
//! coherent-information optimization, with reproducible seeding throughout.

pub mod capacity;
pub mod channel;
pub mod ensembles;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod qlinalg;
pub mod report;

pub use error::{Error, Result};
