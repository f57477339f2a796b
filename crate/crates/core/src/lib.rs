//! Fréchet means and stickiness diagnostics on Euclidean cones and open books.
//!
//! Cones are built over a finite set of directions (spiders), a circle
//! (kales) or a metric graph (e.g. the Petersen graph, giving tree space
//! on four leaves); open books are spiders times a Euclidean spine.

pub mod asymptotics;
pub mod error;
pub mod frechet;
pub mod sampling;
pub mod spaces;
pub mod stickiness;
pub mod transport;

pub use error::{Error, Result};
