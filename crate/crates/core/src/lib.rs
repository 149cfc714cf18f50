//! Physically based renderer that splits light-transport path space by
//! interaction signature, runs Markov chains inside each partition, and guides
//! image-plane perturbations with denoised pre-pass images.
//!
//! The math, colour and image layers are generic over [`num::Real`]; the
//! renderer itself works in `f64` through the aliases below.

pub mod color;
pub mod engine;
pub mod error;
pub mod guidance;
pub mod image;
pub mod lowdisc;
pub mod math;
pub mod num;
pub mod partition;
pub mod path;
pub mod rng;
pub mod scene;

pub use color::scalar_contribution;
pub use error::{Error, Result};
pub use rng::RandomStream;

pub type Vec3 = math::Vec3<f64>;
pub type Ray = math::Ray<f64>;
pub type Rgb = color::Rgb<f64>;
pub type Image = image::ImageBuffer<f64>;
