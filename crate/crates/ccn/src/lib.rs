//! File formats, experiment runner and command-line front end for
//! `ccn-core`.

pub mod cli;
pub mod experiment;
pub mod formats;
pub mod parallel;
pub mod report;
