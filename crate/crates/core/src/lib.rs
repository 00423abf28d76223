//! Simulation, decoding and analysis of repeated error-correction cycles in
//! the distance-three surface code (Surface-17).
pub mod analysis;
pub mod calibration;
pub mod code;
pub mod decoder;
mod error;
pub mod experiment;
pub mod noise;
pub mod seed;
pub mod sim;

pub use error::{Error, Result};
