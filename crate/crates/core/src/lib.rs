//! Vertex-fault-tolerant spanners for doubling metrics with bounded degree,
//! logarithmic hop-diameter and low lightness.
//!
//! Pipeline: [`metric`] normalizes the input, [`hnets`] builds colored net
//! hierarchies, [`incubator`] turns them into an incubator graph with climbing
//! zombies, [`shortcut`] adds skeleton shortcuts, [`single_sink`] provides the
//! star replacement, and [`assembly`] ties it together. [`verify`] holds the
//! brute-force oracles and [`cli`] the command-line front end.

#![allow(clippy::needless_range_loop)]

pub mod assembly;
pub mod cli;
pub mod error;
pub mod hnets;
pub mod incubator;
pub mod metric;
pub mod shortcut;
pub mod single_sink;
pub mod spanner;
pub mod verify;

pub use assembly::{build_spanner, BuildConfig, Construction};
pub use error::{Error, Result};
pub use metric::MetricSpace;
pub use spanner::{Spanner, Tags};
