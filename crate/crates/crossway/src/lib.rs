//! Intersection coordination toolkit: scenario loading, the fixed-step
//! simulator, on-disk formats, and the command line front end.

pub mod cli;
pub mod formats;
pub mod scenario;
pub mod sim;
