//! Closed-loop simulation toolkit for position-domain repetitive control.
//!
//! The spatial repetitive controller stores its disturbance model as a
//! Gaussian process over the wrapped position, so observations taken at
//! varying velocity land on a continuous memory instead of a fixed-length
//! time buffer. A classical delay-line repetitive controller is provided
//! for comparison, together with the plant, loop-shaping and scenario
//! machinery needed to run both side by side.

pub mod baseline;
pub mod design;
pub mod error;
pub mod gp;
pub mod lti;
pub mod sim;
pub mod spatial;

pub use error::{Error, Result};
