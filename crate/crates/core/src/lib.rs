//! Evolutionary dynamics on undirected graphs.
//!
//! Two models share one graph arena:
//!
//! * [`moran`]: the sequential all-or-nothing birth-death process, with a
//!   Monte Carlo engine, an exact absorption solver over the `2^n` state
//!   space, closed forms and degree-based fixation bounds.
//! * [`aggregation`]: the simultaneous mutual-influence dynamic
//!   `r(k+1) = P(r(k)) r(k)`, its potential function and the complete-graph
//!   closed forms.
//!
//! [`control`] builds the two stabilizer-insertion mechanisms on top of the
//! aggregation dynamic.

pub mod aggregation;
pub mod control;
pub mod error;
pub mod graph;
pub mod moran;
pub mod rng;

pub use error::{Error, Result};
pub use graph::{Graph, GraphFamily};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
