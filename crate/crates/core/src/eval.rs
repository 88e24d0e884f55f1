//! Cropping accuracy metrics, the sliding-window baseline and greedy agent
//! rollouts.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::env::{CropWindow, EnvConfig, EpisodeState, ImageDims, PixelRect};
use crate::image::ImageRaster;
use crate::net::{forward, greedy_action, EpisodeEncoder, PolicyParams, RecurrentState};
use crate::scorer::{AestheticScorer, CountedScorer};
use crate::{Error, Result};

/// Axis-aligned rectangle in any consistent unit (pixels or fractions).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub fn new(left: f64, top: f64, width: f64, height: f64) -> Self {
        Self { left, top, width, height }
    }

    pub fn right(&self) -> f64 {
        self.left + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.top + self.height
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

impl From<CropWindow> for Rect {
    fn from(w: CropWindow) -> Self {
        Rect::new(w.x, w.y, w.w, w.h)
    }
}

impl From<PixelRect> for Rect {
    fn from(r: PixelRect) -> Self {
        Rect::new(r.left as f64, r.top as f64, r.width as f64, r.height as f64)
    }
}

/// Intersection over union.
pub fn iou(a: &Rect, b: &Rect) -> f64 {
    let iw = (a.right().min(b.right()) - a.left.max(b.left)).max(0.0);
    let ih = (a.bottom().min(b.bottom()) - a.top.max(b.top)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Mean distance between the four corresponding edges, horizontal edges in
/// units of the image width and vertical edges in units of its height.
pub fn boundary_displacement(a: &Rect, b: &Rect, dims: ImageDims) -> f64 {
    let (w, h) = (dims.width as f64, dims.height as f64);
    let dl = (a.left - b.left).abs() / w;
    let dr = (a.right() - b.right()).abs() / w;
    let dt = (a.top - b.top).abs() / h;
    let db = (a.bottom() - b.bottom()).abs() / h;
    (dl + dr + dt + db) / 4.0
}

/// Best IoU between any of the first `k` ranked candidates and any
/// ground-truth window.
pub fn topk_max_iou(candidates: &[Rect], ground_truth: &[Rect], k: usize) -> f64 {
    candidates
        .iter()
        .take(k)
        .flat_map(|c| ground_truth.iter().map(move |g| iou(c, g)))
        .fold(0.0, f64::max)
}

/// Aspect ratio of a sliding-window family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AspectSpec {
    /// Same ratio as the image.
    Image,
    /// Pixel width over height.
    Ratio(f64),
}

/// Candidate grid for the sliding-window baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    /// Window size relative to the largest window of the ratio that fits.
    pub scales: Vec<f64>,
    pub ratios: Vec<AspectSpec>,
    /// Position stride as a fraction of the image side.
    pub stride: f64,
}

impl GridConfig {
    /// 5 scales x 5 ratios, stride 0.1.
    pub fn default_preset() -> Self {
        Self {
            scales: vec![0.5, 0.6, 0.7, 0.8, 0.9],
            ratios: vec![
                AspectSpec::Image,
                AspectSpec::Ratio(1.0),
                AspectSpec::Ratio(4.0 / 3.0),
                AspectSpec::Ratio(3.0 / 4.0),
                AspectSpec::Ratio(16.0 / 9.0),
            ],
            stride: 0.1,
        }
    }

    /// Superset of the default grid: finer scales, two more ratios, stride 0.05.
    pub fn dense_preset() -> Self {
        let mut ratios = Self::default_preset().ratios;
        ratios.push(AspectSpec::Ratio(3.0 / 2.0));
        ratios.push(AspectSpec::Ratio(2.0 / 3.0));
        Self { scales: (0..10).map(|i| 0.5 + 0.05 * i as f64).collect(), ratios, stride: 0.05 }
    }

    pub fn sparse_preset() -> Self {
        Self { scales: vec![0.6, 0.8], ratios: vec![AspectSpec::Image, AspectSpec::Ratio(1.0)], stride: 0.2 }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "default" => Some(Self::default_preset()),
            "dense" => Some(Self::dense_preset()),
            "sparse" => Some(Self::sparse_preset()),
            _ => None,
        }
    }

    /// Every grid window, in generation order (scale, ratio, row, column),
    /// with duplicates removed.
    pub fn windows(&self, dims: ImageDims) -> Vec<CropWindow> {
        const TOL: f64 = 1e-9;
        let (iw, ih) = (dims.width as f64, dims.height as f64);
        let mut out: Vec<CropWindow> = Vec::new();
        for &scale in &self.scales {
            for ratio in &self.ratios {
                let r = match ratio {
                    AspectSpec::Image => iw / ih,
                    AspectSpec::Ratio(r) => *r,
                };
                let (bw, bh) = if r >= iw / ih { (iw, iw / r) } else { (ih * r, ih) };
                let (w, h) = ((scale * bw / iw).min(1.0), (scale * bh / ih).min(1.0));
                let ny = libm::floor((1.0 - h) / self.stride + TOL) as usize + 1;
                let nx = libm::floor((1.0 - w) / self.stride + TOL) as usize + 1;
                for j in 0..ny {
                    for i in 0..nx {
                        let x = (i as f64 * self.stride).min(1.0 - w);
                        let y = (j as f64 * self.stride).min(1.0 - h);
                        let cand = CropWindow { x, y, w, h };
                        let dup = out.iter().any(|o| {
                            (o.x - x).abs() < TOL && (o.y - y).abs() < TOL && (o.w - w).abs() < TOL && (o.h - h).abs() < TOL
                        });
                        if !dup {
                            out.push(cand);
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredWindow {
    pub window: CropWindow,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// Best first; ties keep generation order.
    pub ranked: Vec<ScoredWindow>,
    pub scorer_calls: usize,
}

/// Scores every grid window and ranks them.
pub fn sliding_window_search<S: AestheticScorer>(image: &ImageRaster, scorer: &S, grid: &GridConfig) -> SearchResult {
    let counted = CountedScorer::new(scorer);
    let mut ranked: Vec<ScoredWindow> = grid
        .windows(image.dims())
        .into_iter()
        .map(|window| ScoredWindow { window, score: counted.score_crop(image, &window) })
        .collect();
    // stable sort keeps generation order among equal scores
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score));
    SearchResult { ranked, scorer_calls: counted.calls() }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentCrop {
    pub window: CropWindow,
    pub steps: usize,
    /// Always 0: inference needs no scorer.
    pub scorer_calls: usize,
}

/// Greedy rollout from the full-image window until the termination action
/// or the step cap.
pub fn agent_crop(params: &PolicyParams, image: &ImageRaster, env: &EnvConfig) -> Result<AgentCrop> {
    let cfg = params.config();
    let encoder = EpisodeEncoder::new(cfg.encoder, image);
    let mut state = EpisodeState::start(image.dims());
    let mut memory = RecurrentState::zeros(cfg.hidden);
    while !state.terminated {
        let out = forward(params, &memory, &encoder.observe(&state.window))?;
        state = state.step(greedy_action(&out.probs), env)?;
        memory = out.next_state;
    }
    Ok(AgentCrop { window: state.window, steps: state.t, scorer_calls: 0 })
}

/// One evaluated image.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalItem {
    pub dims: ImageDims,
    /// Ranked candidate crops; the first one is the method's answer.
    pub candidates: Vec<PixelRect>,
    /// Ground-truth windows, one per annotator.
    pub annotations: Vec<PixelRect>,
    pub steps: usize,
    pub scorer_calls: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnotationScore {
    pub avg_iou: f64,
    pub avg_displacement: f64,
    /// Images that carry this annotation.
    pub images: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub images: usize,
    /// Averages against annotator `j` across images, in annotator order.
    pub per_annotation: Vec<AnnotationScore>,
    /// Mean over images of the mean over annotators.
    pub avg_iou: f64,
    pub avg_boundary_displacement: f64,
    /// `(K, mean top-K max IoU)`.
    pub topk_max_iou: Vec<(usize, f64)>,
    pub avg_steps: f64,
    pub avg_scorer_calls: f64,
    pub avg_seconds: f64,
}

pub fn evaluate_dataset(items: &[EvalItem], ks: &[usize]) -> Result<EvalReport> {
    if items.is_empty() {
        return Err(Error::Empty("evaluation dataset"));
    }
    for (i, item) in items.iter().enumerate() {
        if item.candidates.is_empty() || item.annotations.is_empty() {
            return Err(Error::Misaligned(format!("image {i} lacks a crop or an annotation")));
        }
    }
    let n = items.len() as f64;
    let annotators = items.iter().map(|it| it.annotations.len()).max().unwrap_or(0);
    let mut per_annotation = Vec::with_capacity(annotators);
    for j in 0..annotators {
        let (mut iou_sum, mut disp_sum, mut count) = (0.0, 0.0, 0usize);
        for item in items.iter().filter(|it| it.annotations.len() > j) {
            let (c, g) = (Rect::from(item.candidates[0]), Rect::from(item.annotations[j]));
            iou_sum += iou(&c, &g);
            disp_sum += boundary_displacement(&c, &g, item.dims);
            count += 1;
        }
        per_annotation.push(AnnotationScore {
            avg_iou: iou_sum / count as f64,
            avg_displacement: disp_sum / count as f64,
            images: count,
        });
    }
    let (mut iou_sum, mut disp_sum) = (0.0, 0.0);
    for item in items {
        let c = Rect::from(item.candidates[0]);
        let m = item.annotations.len() as f64;
        iou_sum += item.annotations.iter().map(|g| iou(&c, &Rect::from(*g))).sum::<f64>() / m;
        disp_sum += item.annotations.iter().map(|g| boundary_displacement(&c, &Rect::from(*g), item.dims)).sum::<f64>() / m;
    }
    let topk_max_iou = ks
        .iter()
        .map(|&k| {
            let total: f64 = items
                .iter()
                .map(|it| {
                    let cands: Vec<Rect> = it.candidates.iter().map(|r| Rect::from(*r)).collect();
                    let gts: Vec<Rect> = it.annotations.iter().map(|r| Rect::from(*r)).collect();
                    topk_max_iou(&cands, &gts, k)
                })
                .sum();
            (k, total / n)
        })
        .collect();
    Ok(EvalReport {
        images: items.len(),
        per_annotation,
        avg_iou: iou_sum / n,
        avg_boundary_displacement: disp_sum / n,
        topk_max_iou,
        avg_steps: items.iter().map(|it| it.steps as f64).sum::<f64>() / n,
        avg_scorer_calls: items.iter().map(|it| it.scorer_calls as f64).sum::<f64>() / n,
        avg_seconds: items.iter().map(|it| it.seconds).sum::<f64>() / n,
    })
}
