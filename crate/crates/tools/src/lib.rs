//! File formats, samplers, reports and experiment drivers around
//! `kisin-core`, plus the `kisin` command line.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod format;
pub mod literal;
pub mod report;
pub mod sample;
pub mod selftest;
