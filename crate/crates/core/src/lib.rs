//! Operator algebra, fermion flows, a toy Fock-space simulator and
//! optimal-control checks for fermion quantum stochastic calculus.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod control;
pub mod error;
pub mod fock;
pub mod flow;
pub mod ito;
pub mod operator;
pub mod pair;

pub use error::{Error, Result};
pub use operator::{SystemOperator, Tolerance, C64};
pub use pair::OperatorPair;
