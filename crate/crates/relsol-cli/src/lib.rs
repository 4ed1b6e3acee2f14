//! Library half of the `relsol` command-line front end: configuration
//! resolution, the run manifest, and the `verify` check battery. The binary
//! in main.rs is a thin dispatcher over these.

pub mod config;
pub mod manifest;
pub mod verify;
