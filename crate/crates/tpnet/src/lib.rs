//! Pedestrian trajectory prediction with temporal pyramids.
//!
//! The engine turns each observed trajectory into a multi-resolution
//! pyramid (subsampling above the native scale, spline densification
//! below it), encodes and decodes every scale with one shared recurrent
//! backbone, fuses predictions coarse-to-fine under per-scale supervision,
//! and trains the whole generator against a recurrent discriminator.
//! Evaluation reports ADE/FDE with best-of-K sampling.

pub mod adam;
pub mod checkpoint;
pub mod data;
pub mod error;
pub mod eval;
pub mod model;
pub mod nn;
pub mod point;
pub mod pyramid;
pub mod spline;
pub mod tape;
pub mod tensor;

pub use error::{Error, Result};
pub use point::Point;
