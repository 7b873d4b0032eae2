// negated float comparisons double as NaN rejection
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod continuation;
pub mod device;
pub mod error;
pub mod mathieu;
pub mod pipeline;
pub mod quad;
pub mod special;

pub use error::{Error, Result};
pub mod rates;
pub mod solver;
