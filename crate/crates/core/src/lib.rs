pub mod error;
pub mod linalg;
pub mod matrix;
pub mod tol;

pub use error::{Error, Result};
pub use matrix::CMatrix;
pub use tol::Tolerance;
pub mod algebra;
pub mod superop;
pub mod wedderburn;
pub mod generator;
pub mod model;
pub mod asymptotics;
pub mod structure;
pub mod random;
pub mod analysis;
