//! Finite-dimensional quantum mechanics with a focus on quantum games:
//! states and measurements, quantum channels, strategic-form game engines
//! and the standard quantization protocols built on top of them.

pub mod error;
pub mod games;
pub mod linalg;
pub mod channels;
pub mod measurement;
pub mod protocols;
pub mod states;

pub use error::{Error, Result};
