//! Shortcuts to adiabaticity for expanding atoms in Gaussian optical traps.
//!
//! Time-optimal and bounded expansion protocols built on the Ermakov
//! equation, perturbative fidelity bounds for the trap anharmonicity, and
//! a split-operator solver to check them.

pub mod commands;
pub mod config;
pub mod control;
pub mod ermakov;
pub mod error;
pub mod fidelity;
pub mod modes;
pub mod protocol;
pub mod quadrature;
pub mod sweep;
pub mod tdse;
pub mod units;
pub mod validation;
pub mod wavefunction;

pub use control::{Control, Impulse};
pub use error::{Error, Result};
pub use protocol::{design, Family, Protocol};
pub use units::{ControlBound, DimensionlessTrap, TrapSpec};
