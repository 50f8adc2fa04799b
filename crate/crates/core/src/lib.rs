//! Deciding whether a rational matrix given by a descriptor realization is
//! identically zero.
//!
//! Five independent tests are provided in [`nullrank`]: minimal realization,
//! a peak-gain test after a random bilinear substitution, the structural rank
//! of the system pencil, and two sampled-rank estimators. [`bench`] builds
//! certified-zero test cases and tabulates the decisions of each method.

pub mod analysis;
pub mod bench;
pub mod error;
pub mod kernels;
pub mod nullrank;
pub mod reductions;
pub mod system;

pub use error::{Error, Result};
pub use kernels::Tolerance;
pub use system::{DescriptorSystem, Timing};
