//! Run configuration and its `key = value` text form.
//!
//! The same keys are used by config files and checkpoint headers. Keys
//! mirror the long command-line flags without the leading dashes.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use a2rl_core::net::{EncoderKind, NetConfig};
use a2rl_core::reward::RewardConfig;
use a2rl_core::scorer::CompositionWeights;
use a2rl_core::trainer::TrainerConfig;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScorerKind {
    TargetIou,
    Composition,
}

impl ScorerKind {
    pub fn name(self) -> &'static str {
        match self {
            ScorerKind::TargetIou => "target-iou",
            ScorerKind::Composition => "composition",
        }
    }
}

impl FromStr for ScorerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "target-iou" => Ok(ScorerKind::TargetIou),
            "composition" => Ok(ScorerKind::Composition),
            _ => Err(format!("unknown scorer {s:?} (expected target-iou or composition)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub trainer: TrainerConfig,
    pub reward: RewardConfig,
    pub net: NetConfig,
    pub scorer: ScorerKind,
    pub composition: CompositionWeights,
    pub images: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub grid: String,
    pub out: Option<PathBuf>,
    pub log: Option<PathBuf>,
    pub emit_image: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            trainer: TrainerConfig::default(),
            reward: RewardConfig::default(),
            net: NetConfig::default(),
            scorer: ScorerKind::TargetIou,
            composition: CompositionWeights::default(),
            images: None,
            annotations: None,
            checkpoint: None,
            grid: "default".into(),
            out: None,
            log: None,
            emit_image: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("invalid value {value:?} for {key}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("invalid value {value:?} for {key} (expected true or false)")),
    }
}

struct Shown<'a>(&'a Option<PathBuf>);

impl fmt::Display for Shown<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(p) => write!(f, "{}", p.display()),
            None => Ok(()),
        }
    }
}

fn path_value(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

impl RunConfig {
    /// Sets one key. Unknown keys and unparsable values are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let t = &mut self.trainer;
        match key {
            "scorer" => self.scorer = value.parse()?,
            "encoder" => {
                self.net.encoder = EncoderKind::from_name(value)
                    .ok_or_else(|| format!("unknown encoder {value:?} (expected pixel or coordinate)"))?
            }
            "feature-dim" => self.net.feature_dim = parse(key, value)?,
            "hidden" => self.net.hidden = parse(key, value)?,
            "no-recurrent" => self.net.recurrent = !parse_bool(key, value)?,
            "steps" => t.total_steps = parse(key, value)?,
            "seed" => t.seed = parse(key, value)?,
            "gamma" => t.gamma = parse(key, value)?,
            "beta" => t.beta = parse(key, value)?,
            "tmax" => t.t_max = parse(key, value)?,
            "Tmax" => t.max_episode_steps = parse(key, value)?,
            "lr" => t.learning_rate = parse(key, value)?,
            "batch" => t.batch_size = parse(key, value)?,
            "rms-decay" => t.rms_decay = parse(key, value)?,
            "rms-epsilon" => t.rms_epsilon = parse(key, value)?,
            "grad-clip" => t.grad_clip = if value == "none" { None } else { Some(parse(key, value)?) },
            "log-every" => t.log_every = parse(key, value)?,
            "nr" => self.reward.nr = parse(key, value)?,
            "step-penalty" => self.reward.step_penalty = parse(key, value)?,
            "ar-low" => self.reward.ar_low = parse(key, value)?,
            "ar-high" => self.reward.ar_high = parse(key, value)?,
            "content-weight" => self.composition.content = parse(key, value)?,
            "thirds-weight" => self.composition.thirds = parse(key, value)?,
            "thirds-band" => self.composition.band = parse(key, value)?,
            "images" => self.images = path_value(value),
            "annotations" => self.annotations = path_value(value),
            "checkpoint" => self.checkpoint = path_value(value),
            "grid" => self.grid = value.to_string(),
            "out" => self.out = path_value(value),
            "log" => self.log = path_value(value),
            "emit-image" => self.emit_image = path_value(value),
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Every setting that shapes a run, in a fixed order. Output
    /// destinations are left out so that identical runs written to
    /// different places record identical headers.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let t = &self.trainer;
        let r = &self.reward;
        vec![
            ("scorer", self.scorer.name().into()),
            ("encoder", self.net.encoder.name().into()),
            ("feature-dim", self.net.feature_dim.to_string()),
            ("hidden", self.net.hidden.to_string()),
            ("no-recurrent", (!self.net.recurrent).to_string()),
            ("steps", t.total_steps.to_string()),
            ("seed", t.seed.to_string()),
            ("gamma", t.gamma.to_string()),
            ("beta", t.beta.to_string()),
            ("tmax", t.t_max.to_string()),
            ("Tmax", t.max_episode_steps.to_string()),
            ("lr", t.learning_rate.to_string()),
            ("batch", t.batch_size.to_string()),
            ("rms-decay", t.rms_decay.to_string()),
            ("rms-epsilon", t.rms_epsilon.to_string()),
            ("grad-clip", t.grad_clip.map_or("none".into(), |c| c.to_string())),
            ("log-every", t.log_every.to_string()),
            ("nr", r.nr.to_string()),
            ("step-penalty", r.step_penalty.to_string()),
            ("ar-low", r.ar_low.to_string()),
            ("ar-high", r.ar_high.to_string()),
            ("content-weight", self.composition.content.to_string()),
            ("thirds-weight", self.composition.thirds.to_string()),
            ("thirds-band", self.composition.band.to_string()),
            ("images", Shown(&self.images).to_string()),
            ("grid", self.grid.clone()),
        ]
    }

    /// Applies a config file of `key = value` lines. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), String> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| format!("{origin}: line {}: expected `key = value`", n + 1))?;
            self.set(key.trim(), value.trim()).map_err(|e| format!("{origin}: line {}: {e}", n + 1))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_text(&text, &path.display().to_string()).map_err(CliError::Config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let core = |e: a2rl_core::Error| CliError::Config(e.to_string());
        self.trainer.validate().map_err(core)?;
        self.reward.validate().map_err(core)?;
        self.net.validate().map_err(core)?;
        let w = &self.composition;
        if !(w.content.is_finite() && w.thirds.is_finite() && w.band > 0.0) {
            return Err(CliError::Config("composition weights must be finite and the band positive".into()));
        }
        if a2rl_core::eval::GridConfig::preset(&self.grid).is_none() {
            return Err(CliError::Config(format!("unknown grid preset {:?}", self.grid)));
        }
        Ok(())
    }
}
