//! Command-line tools and the HTTP session service.

pub mod commands;
pub mod server;
pub mod session;
