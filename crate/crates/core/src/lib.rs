//! Numerical laboratory for the Gaussian solutions of linearized
//! Kuramoto–Sivashinsky SPDEs and β-time-fractional SPIDEs.

pub mod covariance;
pub mod error;
pub mod io;
pub mod kernels;
pub mod model;
pub mod moduli;
pub mod radial;
pub mod rng;
pub mod sampler;
pub mod quad;
pub mod spectral;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};

/// Crate version, echoed into run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
