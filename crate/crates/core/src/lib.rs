pub mod amalgam;
pub mod approx;
pub mod error;
pub mod linalg;
pub mod moments;
pub mod optimizer;
pub mod random;
pub mod suite;
pub mod words;

pub use error::{Error, Result};
