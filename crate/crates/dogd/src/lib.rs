//! Delayed projected online gradient descent on quasar-convex loss streams.

pub mod analysis;
pub mod bench;
pub mod delay;
pub mod descent;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod losses;
pub mod oracles;

pub use error::{Error, Result};
