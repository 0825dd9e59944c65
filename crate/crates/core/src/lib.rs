pub mod ambient;
pub mod analysis;
pub mod checks;
pub mod cli;
pub mod commutator;
pub mod config;
pub mod elliptic;
pub mod error;
pub mod field;
pub mod generator;
pub mod grid;
pub mod lab;
pub mod linalg;
pub mod metric;
pub mod ops;
pub mod report;
pub mod spectrum;
pub mod state;

pub use error::{Error, Result};
pub use field::{BeamField, ScalarField, TensorField, VectorField};
pub use grid::{BoundaryTag, Grid};
