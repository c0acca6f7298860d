//! File formats and command-line front end for `holodisc-core`.

pub mod cli;
pub mod format;
