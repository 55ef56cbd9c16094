//! Numerical laboratory for the asymptotics of the fast diffusion equation
//! `u_t = Δu^m` with `0 < m < 1`: Barenblatt profiles, the self-similar change
//! of variables, relative entropy methods and Hardy-Poincaré spectral gaps.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cli;
pub mod config;
pub mod error;
pub mod functionals;
pub mod grid;
pub mod profiles;
pub mod quad;
pub mod rates;
pub mod solver;
pub mod spectral;
pub mod verify;

pub use error::{FadeError, Result};
