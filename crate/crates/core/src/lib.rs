pub mod analysis;
pub mod circle;
pub mod distance;
pub mod error;
pub mod export;
pub mod geodesic;
pub mod mediatrix;
pub mod pipeline;
mod profile;
pub mod scenario;
pub mod surface;

pub use error::{Error, Result};
