//! Numerical tools for T-billiards, Minkowski-Finsler billiards and
//! projective reflection laws in smooth convex bodies.
//!
//! Bodies are immutable and every operation is a pure function of its
//! arguments, so all types can be shared freely across threads.

pub mod config;
pub mod convex_body;
pub mod dynamics;
pub mod error;
pub mod jet;
pub mod numeric;
pub mod osculation;
pub mod poly;
pub mod projectivity;
pub mod reflection;
pub mod sampling;

pub use convex_body::{ConvexBody, GraphGerm, OrientedLine};
pub use error::{Error, Result};
pub use numeric::{Matrix, Vector};
