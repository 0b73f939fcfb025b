pub mod error;
pub mod linalg;
pub mod spinalg;
pub mod register;
pub mod catcode;
pub mod rng;
pub mod gates;
pub mod noise;
pub mod qec;
pub mod threshold;
pub mod control;

pub use error::{Error, Result};
