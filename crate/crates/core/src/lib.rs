//! Calculator and verifier for coupled constant-scalar-curvature Kähler
//! metrics on toric model manifolds.

pub mod bergman;
pub mod config;
pub mod error;
pub mod geom1d;
pub mod invariants;
pub mod rational;
pub mod solver;
pub mod toriclat;
pub mod verify;

pub use error::{Error, Result};
