#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod dilation;
pub mod dst;
pub mod error;
pub mod evolve;
pub mod fit;
pub mod grid;
pub mod interp;
pub mod model;
pub mod quad;
pub mod random;
pub mod scenario;
pub mod snapshot;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{inner, make_grid, reduce, RadialField, RadialGrid};
