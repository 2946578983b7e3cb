pub mod error;
pub mod linalg;
pub mod poly;
pub mod text;
pub mod tolerances;

pub use error::{Error, Result};
pub mod evolve;
pub mod geometry;
pub mod localize;
pub mod modela;
pub mod phase;
pub mod spectral;
pub mod symbol;
