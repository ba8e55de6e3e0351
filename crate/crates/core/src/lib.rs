//! Monte Carlo and exact tools for random matrix products: cocycles on
//! projective space, exit times of the norm cocycle, harmonic functions of
//! the killed walk and the duality between forward and reversed walks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod ensemble;
pub mod error;
pub mod exec;
pub mod framework;
pub mod harmonic;
pub mod oracle;
pub mod projective;
pub mod runner;
pub mod stats;
pub mod target;
pub mod testfn;
pub mod walk;

pub use error::{Error, Result};
