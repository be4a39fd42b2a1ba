//! Seeding, statistics, configuration and the experiment runner behind the
//! command-line tool.

pub mod rng;
pub mod stats;
pub mod config;
pub mod runner;
