// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domain;
pub mod error;
pub mod harness;
pub mod inequalities;
pub mod pde;
pub mod surgery;

pub use error::{Error, Result};
