#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod experiment;
pub mod index;
pub mod percolation;
pub mod quad;
pub mod radii;
pub mod rng;
pub mod sampler;
pub mod spaces;
pub mod theory;
pub mod verify;

pub use error::{Error, Result};
