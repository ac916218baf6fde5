pub mod census;
pub mod cli;
pub mod density;
pub mod error;
pub mod freegroup;
pub mod hyperbolic;
pub mod lattice;
pub mod output;
pub mod tracks;

pub use error::{Error, Result};
