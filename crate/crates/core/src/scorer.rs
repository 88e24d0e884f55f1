//! Aesthetics scorers: the oracle behind the reward.
//!
//! Only the ordering of scores matters to the agent, since the reward takes
//! the sign of score differences. Two scorers are provided: a hidden-target
//! IoU oracle whose optimum is known, and a handcrafted composition score
//! over luminance gradients.

use core::sync::atomic::{AtomicUsize, Ordering};

use alloc::vec::Vec;

use crate::env::CropWindow;
use crate::eval::{iou, Rect};
use crate::image::ImageRaster;

pub trait AestheticScorer {
    /// Score of `window` on `image`. Deterministic and finite.
    fn score(&self, image: &ImageRaster, window: &CropWindow) -> f64;
}

impl<S: AestheticScorer + ?Sized> AestheticScorer for &S {
    fn score(&self, image: &ImageRaster, window: &CropWindow) -> f64 {
        (**self).score(image, window)
    }
}

impl<S: AestheticScorer + ?Sized> AestheticScorer for alloc::sync::Arc<S> {
    fn score(&self, image: &ImageRaster, window: &CropWindow) -> f64 {
        (**self).score(image, window)
    }
}

/// IoU between the window and a hidden target window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetIouScorer {
    pub target: CropWindow,
}

impl TargetIouScorer {
    pub fn new(target: CropWindow) -> Self {
        Self { target }
    }
}

impl AestheticScorer for TargetIouScorer {
    fn score(&self, _image: &ImageRaster, window: &CropWindow) -> f64 {
        target_iou_score(window, &self.target)
    }
}

pub fn target_iou_score(window: &CropWindow, target: &CropWindow) -> f64 {
    iou(&Rect::from(*window), &Rect::from(*target))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositionWeights {
    /// Weight of the content-retention term.
    pub content: f64,
    /// Weight of the rule-of-thirds term.
    pub thirds: f64,
    /// Width of the band around each third line, as a fraction of the crop side.
    pub band: f64,
}

impl Default for CompositionWeights {
    fn default() -> Self {
        Self { content: 0.7, thirds: 0.3, band: 0.05 }
    }
}

/// Handcrafted composition score.
///
/// With `g` the luminance gradient magnitude, `E` total gradient energy and
/// `N` the pixel count:
///
/// ```text
/// content = E_in / E - N_in / N
/// thirds  = sum_in g * k(p) / E_in
/// score   = w_content * content + w_thirds * thirds
/// ```
///
/// `k(p)` is a Gaussian bump around the nearest vertical or horizontal third
/// line of the crop. A gradient-free image scores 0 everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CompositionScorer {
    pub weights: CompositionWeights,
}

impl CompositionScorer {
    pub fn new(weights: CompositionWeights) -> Self {
        Self { weights }
    }
}

impl AestheticScorer for CompositionScorer {
    fn score(&self, image: &ImageRaster, window: &CropWindow) -> f64 {
        composition_score(image, window, &self.weights)
    }
}

/// Forward-difference gradient magnitude of the luminance plane.
pub fn gradient_energy(image: &ImageRaster) -> Vec<f64> {
    let (w, h) = (image.width() as usize, image.height() as usize);
    let lum = image.luminance_plane();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let v = lum[y * w + x];
            let gx = if x + 1 < w { lum[y * w + x + 1] - v } else { 0.0 };
            let gy = if y + 1 < h { lum[(y + 1) * w + x] - v } else { 0.0 };
            out.push(libm::sqrt(gx * gx + gy * gy));
        }
    }
    out
}

pub fn composition_score(image: &ImageRaster, window: &CropWindow, weights: &CompositionWeights) -> f64 {
    let energy = gradient_energy(image);
    let total: f64 = energy.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let rect = window.to_pixel_rect(image.dims());
    let iw = image.width() as usize;
    let n_total = energy.len() as f64;
    let n_in = rect.width as f64 * rect.height as f64;

    let sigma2 = 2.0 * weights.band * weights.band;
    let bump = |u: f64| {
        let d = libm::fabs(u - 1.0 / 3.0).min(libm::fabs(u - 2.0 / 3.0));
        libm::exp(-d * d / sigma2)
    };
    let mut inside = 0.0;
    let mut on_thirds = 0.0;
    for y in rect.top..rect.bottom() {
        let v = (y - rect.top) as f64 + 0.5;
        let ky = bump(v / rect.height as f64);
        for x in rect.left..rect.right() {
            let g = energy[y as usize * iw + x as usize];
            if g == 0.0 {
                continue;
            }
            let u = (x - rect.left) as f64 + 0.5;
            let kx = bump(u / rect.width as f64);
            inside += g;
            on_thirds += g * kx.max(ky);
        }
    }
    let content = inside / total - n_in / n_total;
    let thirds = if inside > 0.0 { on_thirds / inside } else { 0.0 };
    weights.content * content + weights.thirds * thirds
}

/// Scorer wrapper that counts every evaluation.
#[derive(Debug, Default)]
pub struct CountedScorer<S> {
    inner: S,
    calls: AtomicUsize,
}

impl<S: AestheticScorer> CountedScorer<S> {
    pub fn new(inner: S) -> Self {
        Self { inner, calls: AtomicUsize::new(0) }
    }

    /// Scores the crop and bumps the call counter.
    pub fn score_crop(&self, image: &ImageRaster, window: &CropWindow) -> f64 {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.score(image, window)
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }
}

impl<S: AestheticScorer> AestheticScorer for CountedScorer<S> {
    fn score(&self, image: &ImageRaster, window: &CropWindow) -> f64 {
        self.score_crop(image, window)
    }
}
