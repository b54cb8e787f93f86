//! Link-level simulator and experiment runner on top of `zakdd-core`.

pub mod channel;
pub mod config;
pub mod experiments;
pub mod io;
pub mod rng;
pub mod sim;
