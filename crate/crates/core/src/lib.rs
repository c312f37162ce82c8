//! Learning geometric skill nullspaces from pose demonstrations and
//! executing them on serial manipulators.

// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constraints;
pub mod error;
pub mod fitting;
pub mod generate;
pub mod geom;
pub mod io;
pub mod lm;
pub mod manifolds;
pub mod mapping;
pub mod skills;
pub mod solver;

pub use error::{Error, Result};
