//! Library surface of the command-line harness, exposed so integration
//! and acceptance tests drive the same code paths as the binary.

pub mod config;
pub mod runner;
pub mod verify;
