//! Image buffers, PFM/PPM files and error metrics.

mod buffer;
mod io;
mod metrics;

pub use buffer::ImageBuffer;
pub use io::{decode_pfm, encode_pfm, encode_ppm, read_pfm, write_pfm, write_ppm};
pub use metrics::{mean_color, rmse, tile_variance_of_variance};
