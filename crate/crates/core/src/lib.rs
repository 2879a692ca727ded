//! Typed coupled-cell networks.
//!
//! A network is a directed multigraph whose cells and arrows carry types. This
//! crate models such networks, enumerates their balanced colorings, builds
//! vector fields that respect the network symmetries by construction,
//! integrates the resulting ODEs and analyses the synchrony, stationarity and
//! phase-shift patterns of the trajectories.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command-line
//! front end and thread-level parallelism live in the `ccn` companion crate.

#![no_std]
#![deny(rust_2018_idioms)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analyze;
pub mod coloring;
pub mod field;
pub mod fixtures;
pub mod harness;
pub(crate) mod math;
pub mod network;
pub mod rng;
pub mod sim;
pub mod state;
mod unionfind;

pub use coloring::Coloring;
pub use field::CellField;
pub use network::{ArrowId, ArrowTypeId, CellId, CellTypeId, NetworkSpec, TypedNetwork};
pub use sim::Trajectory;
pub use state::StateLayout;
