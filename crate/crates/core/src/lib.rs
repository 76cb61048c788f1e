//! Constructive complex-analysis toolkit: Runge-type approximation by
//! locally univalent functions, Schwarzian-ODE reconstruction of meromorphic
//! functions, constant-curvature conformal metrics, and finite-stage
//! universality experiments along run-away self-map sequences.

pub mod config;
pub mod error;
pub mod experiments;
pub mod extended;
pub mod geometry;
pub mod linalg;
pub mod metrics;
pub mod ode;
pub mod rational;
pub mod report;
pub mod runge;
pub mod universality;

pub use error::{Error, ErrorFamily, Result};
pub use extended::{chordal_distance, ExtComplex};
