//! Online demand response for a single price-responsive electricity consumer.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod forecast;
pub mod harness;
pub mod model;
pub mod offline;
pub mod online;
pub mod oco;

pub use error::{Error, Result};
