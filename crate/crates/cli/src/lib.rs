//! Command-line front end for entrywise rank-one completion.

pub mod commands;
pub mod io;
