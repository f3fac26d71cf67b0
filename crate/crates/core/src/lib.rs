pub mod ahlfors;
pub mod cli;
pub mod cmv;
pub mod error;
pub mod magic;
pub mod mcmv;
pub mod numerics;
pub mod oracle;
pub mod random;
pub mod scalar;
pub mod spectral;
pub mod transfer;

pub use error::{Error, Result};
pub use scalar::C64;
