//! File formats, reports, parallel bootstrap and the `wsc` command line on
//! top of `wsc-core`.

pub mod cli;
pub mod error;
pub mod formats;
pub mod parallel;
pub mod report;
pub mod responses;

pub use error::Error;
