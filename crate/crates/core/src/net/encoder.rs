//! Observation encoders.
//!
//! An observation pairs a global feature of the whole image (computed once
//! per episode) with a local feature of the current crop. The encoders here
//! produce the raw vectors; the learned linear + tanh projection to the
//! feature dimension is the first layer of the network.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::env::{CropWindow, STEP};
use crate::image::ImageRaster;

/// Side of the pixel-patch grid.
pub const PATCH_SIDE: usize = 16;
/// Length of the coordinate encoder's raw vector.
pub const COORD_DIM: usize = 22;
/// Scale of the coordinate features after the geometry.
pub const STAT_GAIN: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EncoderKind {
    /// Crop resampled to a 16x16 grayscale grid by area averaging.
    Pixel,
    /// Window geometry plus luminance statistics, 22 values:
    ///
    /// - `0..4`: `x, y, w, h` of the window;
    /// - `4..6`: share of the image's total intensity inside the window and
    ///   the window's mean intensity;
    /// - `6..10`: intensity centroid and spread inside the window, relative to
    ///   the window (`0..1` across it);
    /// - `10..14`: share of the total intensity beyond each edge (left, right,
    ///   top, bottom);
    /// - `14..18`: mean intensity of the strip one step wide inside each edge;
    /// - `18..22`: signed offset from each window edge to the matching edge of
    ///   the content box, in units of two steps, clamped to `[-1, 1]`. The
    ///   content box is the uniform rectangle with the whole image's
    ///   intensity centroid and spread.
    ///
    /// Values in `4..18` lie in `[0, 1]` and are mapped to `[-1, 1]`; all
    /// values after the geometry are then multiplied by [`STAT_GAIN`].
    Coordinate,
}

impl EncoderKind {
    pub fn input_dim(self) -> usize {
        match self {
            EncoderKind::Pixel => PATCH_SIDE * PATCH_SIDE,
            EncoderKind::Coordinate => COORD_DIM,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EncoderKind::Pixel => "pixel",
            EncoderKind::Coordinate => "coordinate",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "pixel" => Some(EncoderKind::Pixel),
            "coordinate" => Some(EncoderKind::Coordinate),
            _ => None,
        }
    }
}

/// Raw global and local feature vectors fed to the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub global: Arc<[f64]>,
    pub local: Vec<f64>,
}

/// Summed-area table of a per-pixel quantity. Area integrals over
/// fractional rectangles are exact through bilinear interpolation, since
/// the integral of a piecewise-constant field is bilinear inside each cell.
#[derive(Debug, Clone)]
struct AreaTable {
    width: usize,
    height: usize,
    table: Vec<f64>,
}

impl AreaTable {
    fn new(width: usize, height: usize, values: impl Fn(usize, usize) -> f64) -> Self {
        let stride = width + 1;
        let mut table = vec![0.0; stride * (height + 1)];
        for y in 0..height {
            let mut row = 0.0;
            for x in 0..width {
                row += values(x, y);
                table[(y + 1) * stride + x + 1] = table[y * stride + x + 1] + row;
            }
        }
        Self { width, height, table }
    }

    fn at(&self, x: usize, y: usize) -> f64 {
        self.table[y * (self.width + 1) + x]
    }

    /// Integral over `[0, px] x [0, py]` in pixel units.
    fn prefix(&self, px: f64, py: f64) -> f64 {
        let px = px.clamp(0.0, self.width as f64);
        let py = py.clamp(0.0, self.height as f64);
        let x0 = (libm::floor(px) as usize).min(self.width.saturating_sub(1));
        let y0 = (libm::floor(py) as usize).min(self.height.saturating_sub(1));
        let (fx, fy) = (px - x0 as f64, py - y0 as f64);
        let a = self.at(x0, y0);
        let b = self.at(x0 + 1, y0);
        let c = self.at(x0, y0 + 1);
        let d = self.at(x0 + 1, y0 + 1);
        a * (1.0 - fx) * (1.0 - fy) + b * fx * (1.0 - fy) + c * (1.0 - fx) * fy + d * fx * fy
    }

    /// Integral over the normalized rectangle `[x0, x1] x [y0, y1]`.
    fn integral(&self, x0: f64, y0: f64, x1: f64, y1: f64) -> f64 {
        let (w, h) = (self.width as f64, self.height as f64);
        let (ax, ay, bx, by) = (x0 * w, y0 * h, x1 * w, y1 * h);
        self.prefix(bx, by) - self.prefix(ax, by) - self.prefix(bx, ay) + self.prefix(ax, ay)
    }
}

#[derive(Debug, Clone)]
enum Prepared {
    Pixel { lum: AreaTable },
    Coordinate { moments: [AreaTable; 5], content_box: [f64; 4] },
}

/// Per-image encoder state: area tables built once, global feature cached.
#[derive(Debug, Clone)]
pub struct EpisodeEncoder {
    kind: EncoderKind,
    prepared: Prepared,
    global: Arc<[f64]>,
}

impl EpisodeEncoder {
    pub fn new(kind: EncoderKind, image: &ImageRaster) -> Self {
        Self::with_global(kind, image, None)
    }

    /// Like [`EpisodeEncoder::new`] but adopts an already computed global
    /// feature instead of computing it.
    pub fn with_global(kind: EncoderKind, image: &ImageRaster, global: Option<Arc<[f64]>>) -> Self {
        let (w, h) = (image.width() as usize, image.height() as usize);
        let lum = image.luminance_plane();
        let prepared = match kind {
            EncoderKind::Pixel => Prepared::Pixel { lum: AreaTable::new(w, h, |x, y| lum[y * w + x]) },
            EncoderKind::Coordinate => {
                // pixel-center coordinates, normalized
                let cx = |x: usize| (x as f64 + 0.5) / w as f64;
                let cy = |y: usize| (y as f64 + 0.5) / h as f64;
                let l = |x: usize, y: usize| lum[y * w + x];
                let moments = [
                    AreaTable::new(w, h, l),
                    AreaTable::new(w, h, |x, y| l(x, y) * cx(x)),
                    AreaTable::new(w, h, |x, y| l(x, y) * cy(y)),
                    AreaTable::new(w, h, |x, y| l(x, y) * cx(x) * cx(x)),
                    AreaTable::new(w, h, |x, y| l(x, y) * cy(y) * cy(y)),
                ];
                let content_box = content_box(&moments);
                Prepared::Coordinate { moments, content_box }
            }
        };
        let mut encoder = Self { kind, prepared, global: Arc::from(Vec::new()) };
        encoder.global = match global {
            Some(g) => g,
            None => Arc::from(encoder.raw_feature(&CropWindow::FULL)),
        };
        encoder
    }

    pub fn kind(&self) -> EncoderKind {
        self.kind
    }

    pub fn global(&self) -> &Arc<[f64]> {
        &self.global
    }

    pub fn observe(&self, window: &CropWindow) -> Observation {
        Observation { global: Arc::clone(&self.global), local: self.raw_feature(window) }
    }

    fn raw_feature(&self, window: &CropWindow) -> Vec<f64> {
        match &self.prepared {
            Prepared::Pixel { lum } => {
                let mut out = Vec::with_capacity(PATCH_SIDE * PATCH_SIDE);
                let (cw, ch) = (window.w / PATCH_SIDE as f64, window.h / PATCH_SIDE as f64);
                // cell area in pixels, for the average
                let cell_px = cw * lum.width as f64 * ch * lum.height as f64;
                for j in 0..PATCH_SIDE {
                    let y0 = window.y + j as f64 * ch;
                    for i in 0..PATCH_SIDE {
                        let x0 = window.x + i as f64 * cw;
                        let v = lum.integral(x0, y0, x0 + cw, y0 + ch) / cell_px;
                        out.push(v.clamp(0.0, 1.0));
                    }
                }
                out
            }
            Prepared::Coordinate { moments, content_box } => {
                let (x0, y0, x1, y1) = (window.x, window.y, window.right(), window.bottom());
                let [m, mx, my, mxx, myy] = moments.each_ref().map(|t| t.integral(x0, y0, x1, y1));
                let total = moments[0].integral(0.0, 0.0, 1.0, 1.0);
                let area_px = window.area() * moments[0].width as f64 * moments[0].height as f64;
                let mut out = Vec::with_capacity(COORD_DIM);
                out.extend([window.x, window.y, window.w, window.h, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0]);
                if total > 0.0 {
                    out[4] = (m / total).clamp(0.0, 1.0);
                }
                if m > 0.0 && m > total * 1e-12 {
                    out[5] = (m / area_px).clamp(0.0, 1.0);
                    let (ux, uy) = (mx / m, my / m);
                    out[6] = (ux - window.x) / window.w;
                    out[7] = (uy - window.y) / window.h;
                    out[8] = libm::sqrt((mxx / m - ux * ux).max(0.0)) / window.w;
                    out[9] = libm::sqrt((myy / m - uy * uy).max(0.0)) / window.h;
                }
                let lum = &moments[0];
                if total > 0.0 {
                    let beyond = [
                        lum.integral(0.0, 0.0, x0, 1.0),
                        lum.integral(x1, 0.0, 1.0, 1.0),
                        lum.integral(0.0, 0.0, 1.0, y0),
                        lum.integral(0.0, y1, 1.0, 1.0),
                    ];
                    out.extend(beyond.map(|v| (v / total).clamp(0.0, 1.0)));
                } else {
                    out.extend([0.0; 4]);
                }
                let (sw, sh) = (STEP.min(window.w), STEP.min(window.h));
                let px = (lum.width * lum.height) as f64;
                let strips = [
                    (lum.integral(x0, y0, x0 + sw, y1), sw * window.h),
                    (lum.integral(x1 - sw, y0, x1, y1), sw * window.h),
                    (lum.integral(x0, y0, x1, y0 + sh), window.w * sh),
                    (lum.integral(x0, y1 - sh, x1, y1), window.w * sh),
                ];
                out.extend(strips.map(|(v, a)| (v / (a * px)).clamp(0.0, 1.0)));
                let [bl, bt, br, bb] = *content_box;
                // in units of two steps, saturating beyond that
                let gap = |d: f64| (d / (2.0 * STEP)).clamp(-1.0, 1.0);
                out.extend([gap(bl - x0), gap(br - x1), gap(bt - y0), gap(bb - y1)]);
                for (i, v) in out.iter_mut().enumerate().skip(4) {
                    let centered = if i < 18 { 2.0 * *v - 1.0 } else { *v };
                    *v = STAT_GAIN * centered;
                }
                out
            }
        }
    }
}

/// `[left, top, right, bottom]` of the uniform rectangle with the image's
/// intensity centroid and spread, clamped to the image; the full image when
/// the image is black.
fn content_box(moments: &[AreaTable; 5]) -> [f64; 4] {
    let [m, mx, my, mxx, myy] = moments.each_ref().map(|t| t.integral(0.0, 0.0, 1.0, 1.0));
    if !(m > 0.0) {
        return [0.0, 0.0, 1.0, 1.0];
    }
    let (ux, uy) = (mx / m, my / m);
    let half_w = libm::sqrt(3.0 * (mxx / m - ux * ux).max(0.0));
    let half_h = libm::sqrt(3.0 * (myy / m - uy * uy).max(0.0));
    [(ux - half_w).max(0.0), (uy - half_h).max(0.0), (ux + half_w).min(1.0), (uy + half_h).min(1.0)]
}

/// Encodes one observation, reusing `cached_global` when given.
pub fn encode_observation(
    kind: EncoderKind,
    image: &ImageRaster,
    window: &CropWindow,
    cached_global: Option<&Arc<[f64]>>,
) -> Observation {
    EpisodeEncoder::with_global(kind, image, cached_global.cloned()).observe(window)
}
