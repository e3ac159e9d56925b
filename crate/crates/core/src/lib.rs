//! Boole–Bell inequality toolkit.
//!
//! * [`sign`]: exact correlations and Boole–Bell evaluation on ±1 sequences.
//! * [`geometry`]: unit vectors, Malus-law placements and violation witnesses.
//! * [`rng`]: counter-based random streams.
//! * [`quantum`]: prepared-particle and singlet-pair samplers.
//! * [`realism`]: local hidden-variable models and the commitment protocol.
//! * [`experiment`]: a-p certification and the no-a-p-and-b-p contradiction.
//! * [`report`] and [`cli`]: CSV/JSON output and the batch front end.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod quantum;
pub mod realism;
pub mod report;
pub mod rng;
pub mod sign;

pub use error::{Error, Result};
pub use geometry::UnitVector3;
pub use rng::RngStream;
pub use sign::{CorrelationEstimate, SignSequence};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
