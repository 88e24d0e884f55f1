//! In-memory rasters.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::env::{CropWindow, ImageDims, PixelRect};
use crate::{Error, Result};

/// Row-major pixel intensities in `[0, 1]`, 1 (gray) or 3 (RGB) channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageRaster {
    width: u32,
    height: u32,
    channels: u8,
    data: Vec<f64>,
}

impl ImageRaster {
    pub fn new(width: u32, height: u32, channels: u8, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!("zero dimension {width}x{height}")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidImage(format!("{channels} channels")));
        }
        let expected = width as usize * height as usize * channels as usize;
        if data.len() != expected {
            return Err(Error::InvalidImage(format!("expected {expected} samples, got {}", data.len())));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidImage(format!("sample {v} outside [0, 1]")));
        }
        Ok(Self { width, height, channels, data })
    }

    /// Grayscale image filled with `value`.
    pub fn uniform(width: u32, height: u32, value: f64) -> Result<Self> {
        Self::new(width, height, 1, vec![value; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn dims(&self) -> ImageDims {
        ImageDims::new(self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Luminance at `(x, y)`: the plain channel mean for RGB.
    pub fn luminance(&self, x: u32, y: u32) -> f64 {
        let c = self.channels as usize;
        let base = (y as usize * self.width as usize + x as usize) * c;
        if c == 1 {
            self.data[base]
        } else {
            (self.data[base] + self.data[base + 1] + self.data[base + 2]) / 3.0
        }
    }

    pub fn luminance_plane(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.width as usize * self.height as usize);
        for y in 0..self.height {
            for x in 0..self.width {
                out.push(self.luminance(x, y));
            }
        }
        out
    }

    /// Copies the pixels inside `rect`.
    pub fn crop(&self, rect: PixelRect) -> Result<ImageRaster> {
        if !rect.fits(self.dims()) {
            return Err(Error::InvalidWindow(format!("{rect} outside {}x{}", self.width, self.height)));
        }
        let c = self.channels as usize;
        let mut data = Vec::with_capacity(rect.width as usize * rect.height as usize * c);
        for y in rect.top..rect.bottom() {
            let start = (y as usize * self.width as usize + rect.left as usize) * c;
            data.extend_from_slice(&self.data[start..start + rect.width as usize * c]);
        }
        ImageRaster::new(rect.width, rect.height, self.channels, data)
    }

    /// Dark grayscale canvas with `window` painted white, anti-aliased by
    /// exact pixel coverage.
    pub fn render_window(width: u32, height: u32, window: &CropWindow) -> Result<Self> {
        let xs = coverage(width, window.x, window.right());
        let ys = coverage(height, window.y, window.bottom());
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for cy in &ys {
            for cx in &xs {
                data.push((cx * cy).clamp(0.0, 1.0));
            }
        }
        Self::new(width, height, 1, data)
    }
}

/// Fraction of each of `n` unit cells covered by the normalized interval
/// `[lo, hi)`.
pub(crate) fn coverage(n: u32, lo: f64, hi: f64) -> Vec<f64> {
    let (lo, hi) = (lo * n as f64, hi * n as f64);
    (0..n)
        .map(|i| {
            let (a, b) = (i as f64, i as f64 + 1.0);
            (hi.min(b) - lo.max(a)).max(0.0)
        })
        .collect()
}
