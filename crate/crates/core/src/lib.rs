//! Numerical laboratory for classical Yang–Mills–Higgs fields on Minkowski
//! space: compact gauge groups and representations, transports along light
//! rays, broken light-ray transforms, the principal-symbol calculus of
//! threefold interactions, a small leapfrog solver and Higgs reconstruction.

pub mod algebra;
pub mod calculus;
pub mod error;
pub mod fields;
pub mod fit;
pub mod gauge;
pub mod geometry;
pub mod interaction;
pub mod recovery;
pub mod suites;
pub mod ode;
pub mod transport;
pub mod ymh_pde;

pub use error::{LabError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
