//! Point-process simulation and clustering comparison.

pub mod cli;
pub mod compare;
pub mod complexes;
pub mod dists;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod graphs;
pub mod percolation;
pub mod procgen;
pub mod shotnoise;
pub mod spatial;
pub mod stats;
pub mod summaries;
pub mod stream;
pub mod textio;

pub use error::{Error, Result};
