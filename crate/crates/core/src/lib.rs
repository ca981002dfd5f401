//! Exact computations with representations of `(F_p((t)), +)` on
//! `F_p((t))^d` that intertwine the shift, and with the contraction groups
//! they define.

pub mod acceptance;
pub mod cli;
pub mod endo;
pub mod error;
pub mod format;
pub mod fp;
pub mod group;
pub mod instances;
pub mod laurent;
pub mod rep;
pub mod solver;

pub use error::{Error, Result};
