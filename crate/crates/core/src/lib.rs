//! Numerical toolkit for the periodic β-FPUT chain: lattice dynamics, normal
//! modes, a sixth-order symplectic integrator, the first-order normal-form
//! transformation and the resonant/non-resonant energy split.

pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod integrator;
pub mod lattice;
pub mod normalform;
pub mod seed;
pub mod spectral;

pub use error::{Error, Result};
pub use lattice::{ChainState, LatticeParams};
pub use spectral::SpectralField;
