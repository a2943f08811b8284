//! Configuration-driven front end for the `levy-krylov` library.

pub mod commands;
pub mod config;
