//! Command-line front end, solution export, benchmark harness and HTTP service.

pub mod assignment_file;
pub mod bench;
pub mod commands;
pub mod export;
pub mod server;
