//! Clifford commutant toolkit: Pauli monomials, basis classes, dense oracles
//! and magic measures.

pub mod cli;
pub mod commutant;
pub mod dense;
pub mod error;
pub mod fastmono;
pub mod gf;
pub mod magic;
pub mod monomial;
pub mod pauli;
pub mod verify;

pub use error::{Error, Result};
