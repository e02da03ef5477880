pub mod approx;
pub mod badset;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod measure;
pub mod ratpoints;
pub mod sampling;
pub mod simplex;
pub mod tolerance;

pub use error::{Error, Result};
