use std::path::PathBuf;
use std::process::ExitCode;

use a2rl::checkpoint;
use a2rl::commands;
use a2rl::config::RunConfig;
use a2rl::report;
use a2rl::CliError;
use clap::{Args, Parser, Subcommand};

/// Aesthetics-aware image cropping with a recurrent actor-critic agent.
///
/// Settings come from built-in defaults, then the checkpoint (for crop, eval
/// and bench), then `--config FILE`, then flags. Log verbosity is read from
/// the A2RL_LOG environment variable (error, warn, info, debug, trace).
#[derive(Parser)]
#[command(name = "a2rl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an agent and write a checkpoint plus a training log.
    Train {
        #[command(flatten)]
        flags: Flags,
    },
    /// Crop one image; prints `left top width height` in pixels.
    Crop {
        /// Binary PGM (P5) or PPM (P6) image.
        image: PathBuf,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Also write the cropped image here.
        #[arg(long)]
        emit_image: Option<PathBuf>,
        #[command(flatten)]
        flags: Flags,
    },
    /// Score agent crops against an annotation file.
    Eval {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Tab-separated: image path, then 4K integers for K annotators.
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[command(flatten)]
        flags: Flags,
    },
    /// Compare agent episode lengths with sliding-window grids.
    Bench {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args)]
struct Flags {
    /// File of `key = value` lines; keys are the long flag names.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["target-iou", "composition"])]
    scorer: Option<String>,
    #[arg(long, value_parser = ["pixel", "coordinate"])]
    encoder: Option<String>,
    /// Environment steps per stream.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Aspect-ratio penalty (0 disables it).
    #[arg(long, allow_negative_numbers = true)]
    nr: Option<f64>,
    /// Disable the recurrent cell.
    #[arg(long)]
    no_recurrent: bool,
    #[arg(long)]
    gamma: Option<f64>,
    /// Entropy weight.
    #[arg(long)]
    beta: Option<f64>,
    /// Steps per stream between updates.
    #[arg(long)]
    tmax: Option<usize>,
    /// Episode step cap.
    #[arg(long = "Tmax")]
    episode_cap: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    feature_dim: Option<usize>,
    /// Directory of training or benchmark images.
    #[arg(long)]
    images: Option<PathBuf>,
    /// Checkpoint destination for train.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Training log destination (default: <out>.log.tsv).
    #[arg(long)]
    log: Option<PathBuf>,
    /// Sliding-window preset; repeat for several (bench runs all by default).
    #[arg(long, value_parser = ["default", "dense", "sparse"])]
    grid: Vec<String>,
}

impl Flags {
    fn pairs(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v));
            }
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        put("scorer", self.scorer.clone());
        put("encoder", self.encoder.clone());
        put("steps", self.steps.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("nr", self.nr.map(|v| v.to_string()));
        put("no-recurrent", self.no_recurrent.then(|| "true".to_string()));
        put("gamma", self.gamma.map(|v| v.to_string()));
        put("beta", self.beta.map(|v| v.to_string()));
        put("tmax", self.tmax.map(|v| v.to_string()));
        put("Tmax", self.episode_cap.map(|v| v.to_string()));
        put("lr", self.lr.map(|v| v.to_string()));
        put("batch", self.batch.map(|v| v.to_string()));
        put("hidden", self.hidden.map(|v| v.to_string()));
        put("feature-dim", self.feature_dim.map(|v| v.to_string()));
        put("images", path(&self.images));
        put("out", path(&self.out));
        put("log", path(&self.log));
        put("grid", self.grid.first().cloned());
        out
    }

    /// Config-file settings followed by flag settings, in precedence order.
    fn overrides(&self) -> Result<Vec<(String, String)>, CliError> {
        let mut all = Vec::new();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
            // validate the file on its own so errors name its lines
            RunConfig::default().apply_text(&text, &path.display().to_string()).map_err(CliError::Config)?;
            for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
                let (k, v) = line.split_once('=').expect("validated above");
                all.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
        all.extend(self.pairs());
        Ok(all)
    }
}

fn fresh_config(flags: &Flags) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::default();
    for (k, v) in flags.overrides()? {
        config.set(&k, &v).map_err(CliError::Config)?;
    }
    Ok(config)
}

struct Loaded {
    checkpoint: checkpoint::Checkpoint,
    config: RunConfig,
    /// Image directory named by the config file or a flag; the one recorded
    /// in the checkpoint is where training read from and is not reused.
    images: Option<PathBuf>,
}

fn with_checkpoint(path: Option<PathBuf>, flags: &Flags) -> Result<Loaded, CliError> {
    let path = path.ok_or_else(|| CliError::Config("--checkpoint PATH is required".into()))?;
    let checkpoint = checkpoint::load(&path)?;
    let overrides = flags.overrides()?;
    let config = commands::merge_checkpoint_config(&checkpoint.config, &overrides)?;
    let images = overrides.iter().rev().find(|(k, _)| k == "images").map(|(_, v)| PathBuf::from(v));
    Ok(Loaded { checkpoint, config, images })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train { flags } => {
            let config = fresh_config(&flags)?;
            let summary = commands::train(&config)?;
            let o = &summary.outcome;
            eprintln!(
                "trained {} steps in {} updates ({} episodes); wrote {} and {}",
                o.env_steps,
                o.updates,
                o.episodes,
                summary.checkpoint.display(),
                summary.log.display()
            );
        }
        Command::Crop { image, checkpoint, emit_image, flags } => {
            let l = with_checkpoint(checkpoint, &flags)?;
            let out = commands::crop(&l.checkpoint, &l.config, &image, emit_image.as_deref())?;
            println!("{}", out.rect);
            eprintln!("steps: {}", out.steps);
        }
        Command::Eval { checkpoint, annotations, flags } => {
            let l = with_checkpoint(checkpoint, &flags)?;
            let annotations = annotations.ok_or_else(|| CliError::Config("--annotations PATH is required".into()))?;
            let report = commands::eval(&l.checkpoint, &l.config, &annotations, l.images.as_deref())?;
            print!("{}", report::eval_table(&report));
        }
        Command::Bench { checkpoint, flags } => {
            let l = with_checkpoint(checkpoint, &flags)?;
            let grids = if flags.grid.is_empty() {
                vec!["sparse".to_string(), "default".into(), "dense".into()]
            } else {
                flags.grid.clone()
            };
            let tasks = commands::bench_tasks(&l.config, l.images.as_deref())?;
            let rows = commands::bench(&l.checkpoint, &l.config, &tasks, &grids)?;
            print!("{}", report::bench_table(&rows));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("A2RL_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("a2rl: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
