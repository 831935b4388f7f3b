//! Robust maximization of sequence functions under element removal.

pub mod algorithms;
pub mod bounds;
pub mod certify;
pub mod error;
pub mod function;
pub mod oracles;
pub mod properties;
pub mod sequence;

pub use algorithms::{Algorithm, GreedyTrace};
pub use error::{Error, Result};
pub use function::{SequenceFunction, SequenceObjective};
pub use oracles::{OracleConfig, RemovalMode, RemovalModel};
pub use properties::{Budget, PropertyReport};
pub use sequence::{ElementSet, GroundSet, Sequence};
