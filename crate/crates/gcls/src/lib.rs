//! File formats, the benchmark harness and the command line for
//! [`gcls_core`].

pub mod bench;
pub mod cli;
pub mod io;

pub use gcls_core as core;
