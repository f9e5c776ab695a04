pub mod error;
pub mod geometry;
pub mod vehicle;
pub mod dubins;
pub mod lp;
pub mod reference;
pub mod smoother;
pub mod coverage;
pub mod field;
pub mod config;
pub mod pipeline;
pub mod output;

pub use error::{Error, Result};
