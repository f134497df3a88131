//! Linear and nonlinear instability of stratified shear flows in a periodic channel.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dispersion;
pub mod error;
pub mod evolve;
pub mod modes;
pub mod profiles;
pub mod quadrature;
pub mod rootfinder;

pub use error::{Result, StabilityError};
