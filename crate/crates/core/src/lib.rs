//! Operator frames and *-operator frames over finite-dimensional C*-algebras.

pub mod algebra;
pub mod error;
pub mod frames;
pub mod hilbert;
pub mod linalg;
pub mod morphisms;
pub mod operators;
pub mod rng;
pub mod serial;
pub mod tensor;

pub use error::{Error, Result};
