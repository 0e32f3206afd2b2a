pub mod basis;
pub mod config;
pub mod entanglement;
pub mod error;
pub mod geometry;
pub mod grouping;
pub mod linalg;
pub mod state;
pub mod shots;
pub mod sweep;
pub mod io;
pub mod cli;
