//! Netpbm images (PBM, PGM, PPM, PAM) via the `image` crate.
//!
//! Samples are normalized to `[0, 1]` by the file's maxval; the decoder
//! rescales maxvals other than 255 and 65535 to 8 bits first. Gray files
//! become one-channel rasters, everything else RGB; alpha is dropped.

use std::fs;
use std::io::{self, Cursor};
use std::path::Path;

use a2rl_core::image::ImageRaster;
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder, ImageFormat};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PnmError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("not a readable Netpbm image: {0}")]
    Decode(#[from] image::ImageError),
    #[error("{0}")]
    Raster(#[from] a2rl_core::Error),
}

fn unit(samples: &[u16]) -> Vec<f64> {
    samples.iter().map(|&v| v as f64 / u16::MAX as f64).collect()
}

pub fn decode(bytes: &[u8]) -> Result<ImageRaster, PnmError> {
    let image = image::load_from_memory_with_format(bytes, ImageFormat::Pnm)?;
    let (width, height) = (image.width(), image.height());
    let raster = if image.color().has_color() {
        ImageRaster::new(width, height, 3, unit(image.into_rgb16().as_raw()))
    } else {
        ImageRaster::new(width, height, 1, unit(image.into_luma16().as_raw()))
    };
    Ok(raster?)
}

pub fn load_image(path: impl AsRef<Path>) -> Result<ImageRaster, PnmError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| PnmError::Io { path: path.display().to_string(), source })?;
    decode(&bytes)
}

/// Encodes as binary P5 (gray) or P6 (RGB) with maxval 255.
pub fn encode(image: &ImageRaster) -> Vec<u8> {
    let samples: Vec<u8> = image.data().iter().map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8).collect();
    let (subtype, color) = if image.channels() == 1 {
        (PnmSubtype::Graymap(SampleEncoding::Binary), ExtendedColorType::L8)
    } else {
        (PnmSubtype::Pixmap(SampleEncoding::Binary), ExtendedColorType::Rgb8)
    };
    let mut out = Cursor::new(Vec::new());
    PnmEncoder::new(&mut out)
        .with_subtype(subtype)
        .write_image(&samples, image.width(), image.height(), color)
        .expect("in-memory write of a well-formed raster");
    out.into_inner()
}
