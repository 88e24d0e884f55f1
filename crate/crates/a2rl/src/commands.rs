//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use a2rl_core::env::PixelRect;
use a2rl_core::eval::{agent_crop, evaluate_dataset, sliding_window_search, EvalItem, EvalReport, GridConfig};
use a2rl_core::image::ImageRaster;
use a2rl_core::rng;
use a2rl_core::scorer::{AestheticScorer, CompositionScorer};
use a2rl_core::trainer::{ImagePool, SyntheticTargets, Task, TaskSource, TrainOutcome, Trainer};
use log::{info, warn};

use crate::annotations::{self, AnnotationEntry};
use crate::checkpoint::{self, Checkpoint};
use crate::config::{RunConfig, ScorerKind};
use crate::report::{self, BenchRow};
use crate::{fsio, pnm, CliError};

/// Synthetic targets used by `bench` when no image directory is given.
pub const SYNTHETIC_BENCH_IMAGES: usize = 50;
/// Random stream for held-out synthetic targets, disjoint from the training
/// streams.
const HELD_OUT_STREAM: u64 = 1 << 40;

const IMAGE_EXTENSIONS: [&str; 3] = ["pgm", "ppm", "pnm"];

/// Netpbm files directly inside `dir`, sorted by name.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries =
        fs::read_dir(dir).map_err(|e| CliError::Input(format!("cannot read images directory {}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Input(format!("no .pgm/.ppm/.pnm images in {}", dir.display())));
    }
    Ok(paths)
}

pub fn load_image(path: &Path) -> Result<ImageRaster, CliError> {
    pnm::load_image(path).map_err(|e| match e {
        pnm::PnmError::Io { .. } => CliError::Input(e.to_string()),
        other => CliError::Input(format!("{}: {other}", path.display())),
    })
}

fn load_dir(dir: &Path) -> Result<Vec<Arc<ImageRaster>>, CliError> {
    list_images(dir)?.iter().map(|p| load_image(p).map(Arc::new)).collect()
}

pub fn default_log_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".log.tsv");
    out.with_file_name(name)
}

fn require_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() && !p.is_dir() => {
            Err(CliError::Input(format!("output directory {} does not exist", p.display())))
        }
        _ => Ok(()),
    }
}

#[derive(Debug)]
pub struct TrainSummary {
    pub outcome: TrainOutcome,
    pub checkpoint: PathBuf,
    pub log: PathBuf,
}

/// Trains, then writes the checkpoint and the training log.
pub fn train(config: &RunConfig) -> Result<TrainSummary, CliError> {
    config.validate()?;
    let out = config.out.clone().ok_or_else(|| CliError::Config("train needs --out PATH".into()))?;
    let log_path = config.log.clone().unwrap_or_else(|| default_log_path(&out));
    require_parent(&out)?;
    require_parent(&log_path)?;

    let source: Box<dyn TaskSource> = match config.scorer {
        ScorerKind::TargetIou => {
            if let Some(dir) = &config.images {
                warn!("the target-iou scorer trains on synthetic targets; ignoring images in {}", dir.display());
            }
            Box::new(SyntheticTargets::default())
        }
        ScorerKind::Composition => {
            let dir = config
                .images
                .as_ref()
                .ok_or_else(|| CliError::Config("the composition scorer trains on images; pass --images DIR".into()))?;
            let images = load_dir(dir)?;
            info!("loaded {} training images from {}", images.len(), dir.display());
            Box::new(ImagePool::new(images, Arc::new(CompositionScorer::new(config.composition)))?)
        }
    };

    let mut trainer = Trainer::new(config.net, config.trainer, config.reward, source.as_ref())?;
    let mut logged = 0;
    while trainer.round()? {
        for r in &trainer.log()[logged..] {
            info!(
                "step {} reward {:.3} length {:.2} final score {:.4} entropy {:.4}",
                r.step, r.mean_reward, r.mean_length, r.mean_final_score, r.entropy
            );
        }
        logged = trainer.log().len();
    }
    let outcome = trainer.finish();
    checkpoint::save(&out, config, &outcome.params)?;
    fsio::write_output(&log_path, report::train_log(&outcome.log).as_bytes())?;
    Ok(TrainSummary { outcome, checkpoint: out, log: log_path })
}

/// Applies command-line or config-file settings on top of a checkpoint's
/// configuration. Network settings must agree with the checkpoint.
pub fn merge_checkpoint_config(base: &RunConfig, overrides: &[(String, String)]) -> Result<RunConfig, CliError> {
    let mut config = base.clone();
    for (key, value) in overrides {
        config.set(key, value).map_err(CliError::Config)?;
    }
    if config.net != base.net {
        return Err(CliError::Mismatch(format!(
            "requested network {:?} differs from the checkpoint's {:?}",
            config.net, base.net
        )));
    }
    config.validate()?;
    Ok(config)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CropOutput {
    pub rect: PixelRect,
    pub steps: usize,
}

/// Greedy crop of one image; writes the cropped raster when `emit` is set.
pub fn crop(checkpoint: &Checkpoint, config: &RunConfig, image: &Path, emit: Option<&Path>) -> Result<CropOutput, CliError> {
    if let Some(path) = emit {
        require_parent(path)?;
    }
    let raster = load_image(image)?;
    let result = agent_crop(&checkpoint.params, &raster, &config.trainer.env())?;
    let rect = result.window.to_pixel_rect(raster.dims());
    if let Some(path) = emit {
        fsio::write_output(path, &pnm::encode(&raster.crop(rect)?))?;
    }
    Ok(CropOutput { rect, steps: result.steps })
}

fn resolve(entry: &AnnotationEntry, images: Option<&Path>, annotations: &Path) -> PathBuf {
    if entry.image.is_absolute() {
        return entry.image.clone();
    }
    let base = images.map(Path::to_path_buf).or_else(|| annotations.parent().map(Path::to_path_buf));
    base.map_or_else(|| entry.image.clone(), |b| b.join(&entry.image))
}

/// Agent crops scored against an annotation file. Relative image paths
/// resolve against `images`, or against the annotation file's directory.
pub fn eval(
    checkpoint: &Checkpoint,
    config: &RunConfig,
    annotations: &Path,
    images: Option<&Path>,
) -> Result<EvalReport, CliError> {
    if let Some(dir) = images {
        if !dir.is_dir() {
            return Err(CliError::Input(format!("images directory {} does not exist", dir.display())));
        }
    }
    let entries = annotations::load(annotations)?;
    let env = config.trainer.env();
    let mut items = Vec::with_capacity(entries.len());
    for entry in &entries {
        let path = resolve(entry, images, annotations);
        let raster = load_image(&path)
            .map_err(|e| CliError::Input(format!("{}: line {}: {e}", annotations.display(), entry.line)))?;
        let dims = raster.dims();
        if let Some(b) = entry.boxes.iter().find(|b| !b.fits(dims)) {
            return Err(CliError::Input(format!(
                "{}: line {}: box `{b}` exceeds the {}x{} image",
                annotations.display(),
                entry.line,
                dims.width,
                dims.height
            )));
        }
        let start = Instant::now();
        let result = agent_crop(&checkpoint.params, &raster, &env)?;
        let seconds = start.elapsed().as_secs_f64();
        items.push(EvalItem {
            dims,
            candidates: vec![result.window.to_pixel_rect(dims)],
            annotations: entry.boxes.clone(),
            steps: result.steps,
            scorer_calls: result.scorer_calls,
            seconds,
        });
    }
    Ok(evaluate_dataset(&items, &[1])?)
}

/// Tasks for benchmarking: every image in `images` under the composition
/// scorer, or held-out synthetic targets under the target-IoU scorer.
pub fn bench_tasks(config: &RunConfig, images: Option<&Path>) -> Result<Vec<Task>, CliError> {
    match (images, config.scorer) {
        (Some(dir), ScorerKind::Composition) => {
            let scorer: Arc<dyn AestheticScorer + Send + Sync> = Arc::new(CompositionScorer::new(config.composition));
            Ok(load_dir(dir)?.into_iter().map(|image| Task { image, scorer: Arc::clone(&scorer) }).collect())
        }
        (Some(_), ScorerKind::TargetIou) => Err(CliError::Config(
            "the target-iou scorer needs synthetic targets; drop --images or use --scorer composition".into(),
        )),
        (None, ScorerKind::TargetIou) => {
            let source = SyntheticTargets::default();
            let mut rng = rng::stream(config.trainer.seed, HELD_OUT_STREAM);
            Ok((0..SYNTHETIC_BENCH_IMAGES).map(|_| source.sample(&mut rng)).collect())
        }
        (None, ScorerKind::Composition) => {
            Err(CliError::Config("the composition scorer benchmarks real images; pass --images DIR".into()))
        }
    }
}

/// One row for the agent, then one per grid preset.
pub fn bench(checkpoint: &Checkpoint, config: &RunConfig, tasks: &[Task], grids: &[String]) -> Result<Vec<BenchRow>, CliError> {
    if tasks.is_empty() {
        return Err(CliError::Input("no images to benchmark".into()));
    }
    let presets = grids
        .iter()
        .map(|name| {
            GridConfig::preset(name)
                .map(|g| (name.as_str(), g))
                .ok_or_else(|| CliError::Config(format!("unknown grid preset {name:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let n = tasks.len() as f64;
    let env = config.trainer.env();

    let (mut steps, mut calls, mut seconds) = (0usize, 0usize, 0.0);
    for task in tasks {
        let start = Instant::now();
        let result = agent_crop(&checkpoint.params, &task.image, &env)?;
        seconds += start.elapsed().as_secs_f64();
        steps += result.steps;
        calls += result.scorer_calls;
    }
    let mut rows =
        vec![BenchRow { method: "agent".into(), avg_steps: steps as f64 / n, avg_scorer_calls: calls as f64 / n, avg_seconds: seconds / n }];

    for (name, grid) in presets {
        let (mut windows, mut calls, mut seconds) = (0usize, 0usize, 0.0);
        for task in tasks {
            let start = Instant::now();
            let result = sliding_window_search(&task.image, &task.scorer, &grid);
            seconds += start.elapsed().as_secs_f64();
            windows += result.ranked.len();
            calls += result.scorer_calls;
        }
        rows.push(BenchRow {
            method: format!("grid-{name}"),
            avg_steps: windows as f64 / n,
            avg_scorer_calls: calls as f64 / n,
            avg_seconds: seconds / n,
        });
    }
    Ok(rows)
}
