pub mod chain;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod flat;
pub mod functionals;
pub mod hfunc;
pub mod linalg;
pub mod lp;
pub mod quadrature;
pub mod rectifiable;
pub mod rng;
pub mod slicing;

pub use error::{Error, Result};
