//! Batch front end: configuration, table I/O and the run modes behind the
//! `obsharvest` binary.

pub mod config;
pub mod io;
pub mod run;
