//! Exact verification toolkit for the GL(3) trigonometric R-matrix, its
//! chain monodromy, off-shell Bethe vectors and multiple-action formulas.

pub mod action;
pub mod bethe;
pub mod chain;
pub mod error;
pub mod izergin;
pub mod rmatrix;
pub mod scalars;
pub mod setcalc;
pub mod verify;

pub use error::{Error, Result};
