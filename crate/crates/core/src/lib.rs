//! Numerical semi-Finsler geometry on manifolds with timelike boundary:
//! cone geodesics, boundary lightconvexity, lightspace charts and the
//! Fermat metric of stationary products.

pub mod boundary;
pub mod connection;
pub mod dual;
pub mod error;
pub mod field;
pub mod flow;
pub mod geometry;
pub mod lightspace;
pub mod linalg;
pub mod models;
pub mod oracle;
pub mod parallel;
pub mod sampling;
pub mod suite;
pub mod tolerance;

pub use error::{Error, Result};
pub use geometry::SpacetimeModel;
