#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distances;
pub mod error;
mod flow;
pub mod invariants;
pub mod lab;
pub mod measurements;
pub mod mm;
pub mod models;
pub mod numeric;
pub mod rng;
pub mod special;

pub use error::{MmError, Result};
