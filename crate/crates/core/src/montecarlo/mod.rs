//! Monte Carlo campaigns and the statistics used to judge them.

mod campaign;
pub mod report;
mod stats;

pub use campaign::*;
pub use stats::*;
