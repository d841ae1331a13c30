//! Eigenvalues of the Gauss-Kuzmin-Wirsing transfer operator.

pub mod analysis;
pub mod error;
pub mod kernel;
pub mod numerics;
pub mod oracle;
pub mod spectral;
pub mod traces;

pub use error::{Error, Result};
