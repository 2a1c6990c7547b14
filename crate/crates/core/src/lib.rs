pub mod airy;
pub mod error;
pub mod gravstates;
pub mod interp;
pub mod ode;
pub mod potentials;
pub mod quadrature;
pub mod quench;
pub mod reflection;
pub mod units;

pub use error::{QuenchError, Result};
