//! Batched n-step advantage actor-critic training.
//!
//! `batch_size` episode streams advance in lockstep. In each round every
//! stream takes `t_max` steps; an episode that ends inside the round is
//! replaced by a fresh one. Each stretch of one episode forms a segment with
//! n-step returns bootstrapped from the critic (or from zero after the
//! termination action). The segment gradients are summed and applied in a
//! single RMSProp update.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::env::{Action, CropWindow, EnvConfig, EpisodeState, ImageDims};
use crate::image::ImageRaster;
use crate::net::{
    backward, forward, sample_action, EpisodeEncoder, Gradients, NetConfig, Observation, PolicyParams,
    RecurrentState, Tape, TapeStep,
};
use crate::optim::RmsProp;
use crate::reward::RewardConfig;
use crate::rng::{self, Rng};
use crate::scorer::{AestheticScorer, TargetIouScorer};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainerConfig {
    pub gamma: f64,
    /// Entropy bonus weight.
    pub beta: f64,
    /// Steps per stream between updates.
    pub t_max: usize,
    /// Episode step cap.
    pub max_episode_steps: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub rms_decay: f64,
    pub rms_epsilon: f64,
    pub seed: u64,
    /// Environment steps per stream. Streams advance in lockstep, so this
    /// is also the number of batched steps; each update consumes `t_max`.
    pub total_steps: usize,
    /// Global gradient-norm clip; `None` disables it.
    pub grad_clip: Option<f64>,
    /// Emit a log record every this many updates.
    pub log_every: usize,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            beta: 0.05,
            t_max: 10,
            max_episode_steps: 50,
            learning_rate: 0.0005,
            batch_size: 32,
            rms_decay: 0.99,
            rms_epsilon: 1e-8,
            seed: 0,
            total_steps: 20_000,
            grad_clip: Some(40.0),
            log_every: 10,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: alloc::string::String| Err(Error::Config(msg));
        if !(0.0..=1.0).contains(&self.gamma) {
            return fail(format!("gamma must be in [0, 1], got {}", self.gamma));
        }
        if !(self.beta >= 0.0) {
            return fail(format!("beta must be >= 0, got {}", self.beta));
        }
        if self.t_max < 1 || self.t_max > self.max_episode_steps {
            return fail(format!("need 1 <= t_max <= T_max, got t_max={} T_max={}", self.t_max, self.max_episode_steps));
        }
        if self.batch_size < 1 {
            return fail("batch size must be >= 1".into());
        }
        if !(self.learning_rate > 0.0) || !(0.0..1.0).contains(&self.rms_decay) || !(self.rms_epsilon > 0.0) {
            return fail("learning rate, decay and epsilon must be positive, decay below 1".into());
        }
        if self.log_every < 1 {
            return fail("log_every must be >= 1".into());
        }
        Ok(())
    }

    pub fn env(&self) -> EnvConfig {
        EnvConfig { max_steps: self.max_episode_steps, ..EnvConfig::default() }
    }
}

/// Discounted returns by the backward recursion `R <- r_i + gamma * R`,
/// starting from 0 after termination or from `bootstrap` after a cut.
pub fn compute_returns(rewards: &[f64], terminal: bool, bootstrap: f64, gamma: f64) -> Vec<f64> {
    let mut out = alloc::vec![0.0; rewards.len()];
    let mut acc = if terminal { 0.0 } else { bootstrap };
    for (o, r) in out.iter_mut().zip(rewards).rev() {
        acc = r + gamma * acc;
        *o = acc;
    }
    out
}

/// One recorded environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub observation: Observation,
    /// Recurrent state the step was taken from.
    pub state: RecurrentState,
    pub action: Action,
    pub reward: f64,
    pub value: f64,
    pub probs: [f64; crate::env::NUM_ACTIONS],
}

/// Loss and gradients of a recorded segment given its returns.
pub fn segment_loss(
    params: &PolicyParams,
    transitions: &[Transition],
    returns: &[f64],
    beta: f64,
) -> Result<(f64, Gradients)> {
    if transitions.len() != returns.len() {
        return Err(Error::Misaligned(format!("{} transitions, {} returns", transitions.len(), returns.len())));
    }
    let initial = match transitions.first() {
        Some(t) => t.state.clone(),
        None => RecurrentState::zeros(params.config().hidden),
    };
    let steps = transitions
        .iter()
        .zip(returns)
        .map(|(t, r)| TapeStep { observation: t.observation.clone(), action: t.action, ret: *r })
        .collect();
    let out = backward(params, &Tape { initial, steps }, beta)?;
    Ok((out.loss, out.grads))
}

/// An image plus the scorer that rewards crops of it.
#[derive(Clone)]
pub struct Task {
    pub image: Arc<ImageRaster>,
    pub scorer: Arc<dyn AestheticScorer + Send + Sync>,
}

impl core::fmt::Debug for Task {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Task").field("dims", &self.image.dims()).finish_non_exhaustive()
    }
}

/// Supplies a task per episode.
pub trait TaskSource {
    fn sample(&self, rng: &mut Rng) -> Task;
}

/// Hidden-target oracle episodes. Each episode draws a target window with
/// sides in `[0.3, 0.8]` and an in-range aspect ratio, renders it as a
/// bright rectangle on a dark canvas, and scores crops by IoU with it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticTargets {
    pub dims: ImageDims,
    pub min_side: f64,
    pub max_side: f64,
    pub ar_low: f64,
    pub ar_high: f64,
}

impl Default for SyntheticTargets {
    fn default() -> Self {
        Self { dims: ImageDims::new(40, 40), min_side: 0.3, max_side: 0.8, ar_low: 0.5, ar_high: 2.0 }
    }
}

impl SyntheticTargets {
    pub fn sample_target(&self, rng: &mut Rng) -> CropWindow {
        loop {
            let w = rng::uniform(rng, self.min_side, self.max_side);
            let h = rng::uniform(rng, self.min_side, self.max_side);
            let x = rng::uniform(rng, 0.0, 1.0 - w);
            let y = rng::uniform(rng, 0.0, 1.0 - h);
            let target = CropWindow { x, y, w, h };
            let ar = target.aspect_ratio(self.dims);
            if (self.ar_low..=self.ar_high).contains(&ar) {
                return target;
            }
        }
    }

    pub fn task_for(&self, target: CropWindow) -> Task {
        let image = ImageRaster::render_window(self.dims.width, self.dims.height, &target)
            .expect("rendered canvas has positive size and values in [0, 1]");
        Task { image: Arc::new(image), scorer: Arc::new(TargetIouScorer::new(target)) }
    }
}

impl TaskSource for SyntheticTargets {
    fn sample(&self, rng: &mut Rng) -> Task {
        let target = self.sample_target(rng);
        self.task_for(target)
    }
}

/// Uniform sampling with replacement from a fixed image set.
#[derive(Clone)]
pub struct ImagePool {
    images: Vec<Arc<ImageRaster>>,
    scorer: Arc<dyn AestheticScorer + Send + Sync>,
}

impl ImagePool {
    pub fn new(images: Vec<Arc<ImageRaster>>, scorer: Arc<dyn AestheticScorer + Send + Sync>) -> Result<Self> {
        if images.is_empty() {
            return Err(Error::Empty("image source"));
        }
        Ok(Self { images, scorer })
    }
}

impl TaskSource for ImagePool {
    fn sample(&self, rng: &mut Rng) -> Task {
        let image = Arc::clone(&self.images[rng::index(rng, self.images.len())]);
        Task { image, scorer: Arc::clone(&self.scorer) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRecord {
    /// Environment steps per stream so far.
    pub step: usize,
    pub mean_reward: f64,
    pub mean_length: f64,
    pub mean_final_score: f64,
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: PolicyParams,
    pub log: Vec<LogRecord>,
    /// Environment steps per stream.
    pub env_steps: usize,
    /// Transitions summed over all streams.
    pub transitions: usize,
    pub updates: usize,
    pub episodes: usize,
    pub scorer_calls: usize,
    pub longest_episode: usize,
}

/// Steps of one episode rolled out between two updates, with their returns.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub transitions: Vec<Transition>,
    pub returns: Vec<f64>,
}

struct Stream {
    rng: Rng,
    task: Task,
    encoder: EpisodeEncoder,
    state: EpisodeState,
    memory: RecurrentState,
    score: f64,
    total_reward: f64,
}

impl Stream {
    fn start(mut rng: Rng, source: &dyn TaskSource, encoder_kind: crate::net::EncoderKind, hidden: usize) -> Self {
        let task = source.sample(&mut rng);
        let encoder = EpisodeEncoder::new(encoder_kind, &task.image);
        let state = EpisodeState::start(task.image.dims());
        let score = task.scorer.score(&task.image, &state.window);
        Self { rng, task, encoder, state, memory: RecurrentState::zeros(hidden), score, total_reward: 0.0 }
    }
}

#[derive(Default)]
struct Window {
    rewards: f64,
    lengths: f64,
    finals: f64,
    episodes: usize,
    entropy: f64,
    transitions: usize,
}

/// Training state: parameters, optimizer and the episode streams.
pub struct Trainer<'a> {
    config: TrainerConfig,
    reward: RewardConfig,
    env: EnvConfig,
    params: PolicyParams,
    optimizer: RmsProp,
    source: &'a dyn TaskSource,
    streams: Vec<Stream>,
    env_steps: usize,
    transitions: usize,
    updates: usize,
    episodes: usize,
    scorer_calls: usize,
    longest_episode: usize,
    log: Vec<LogRecord>,
    window: Window,
}

impl<'a> Trainer<'a> {
    pub fn new(net: NetConfig, config: TrainerConfig, reward: RewardConfig, source: &'a dyn TaskSource) -> Result<Self> {
        config.validate()?;
        reward.validate()?;
        let params = PolicyParams::init(net, &mut rng::stream(config.seed, 0))?;
        Self::with_params(params, config, reward, source)
    }

    /// Starts from existing parameters.
    pub fn with_params(
        params: PolicyParams,
        config: TrainerConfig,
        reward: RewardConfig,
        source: &'a dyn TaskSource,
    ) -> Result<Self> {
        config.validate()?;
        reward.validate()?;
        let net = *params.config();
        let streams: Vec<Stream> = (0..config.batch_size)
            .map(|i| Stream::start(rng::stream(config.seed, i as u64 + 1), source, net.encoder, net.hidden))
            .collect();
        let optimizer = RmsProp::new(params.len(), config.learning_rate, config.rms_decay, config.rms_epsilon);
        Ok(Self {
            env: config.env(),
            config,
            reward,
            optimizer,
            source,
            scorer_calls: streams.len(),
            streams,
            params,
            env_steps: 0,
            transitions: 0,
            updates: 0,
            episodes: 0,
            longest_episode: 0,
            log: Vec::new(),
            window: Window::default(),
        })
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }

    /// Environment steps per stream so far.
    pub fn env_steps(&self) -> usize {
        self.env_steps
    }

    /// Log records emitted so far.
    pub fn log(&self) -> &[LogRecord] {
        &self.log
    }

    fn done(&self) -> bool {
        self.env_steps >= self.config.total_steps
    }

    /// Rolls out up to `limit` steps of the current episode of `stream`.
    /// Returns the transitions, whether the last one was the termination
    /// action, and the bootstrap value after a cut.
    fn rollout(&mut self, index: usize, limit: usize) -> Result<(Vec<Transition>, bool, f64)> {
        let (params, reward, env) = (&self.params, &self.reward, &self.env);
        let stream = &mut self.streams[index];
        let mut segment = Vec::with_capacity(limit);
        while segment.len() < limit && !stream.state.terminated {
            let observation = stream.encoder.observe(&stream.state.window);
            let out = forward(params, &stream.memory, &observation)?;
            let action = sample_action(&out.probs, &mut stream.rng);
            let t = stream.state.t;
            let next = stream.state.step(action, env)?;
            let ar = next.window.aspect_ratio(next.dims);
            let r = if action.is_termination() {
                reward.termination_reward(t) + reward.aspect_penalty(ar)
            } else {
                let score = stream.task.scorer.score(&stream.task.image, &next.window);
                self.scorer_calls += 1;
                let r = reward.full_reward(stream.score, score, t, ar);
                stream.score = score;
                r
            };
            debug_assert!(next.window.is_valid(env.min_width, env.min_height));
            self.window.entropy += out.entropy();
            self.window.transitions += 1;
            segment.push(Transition {
                observation,
                state: core::mem::replace(&mut stream.memory, out.next_state),
                action,
                reward: r,
                value: out.value,
                probs: out.probs,
            });
            stream.state = next;
            stream.total_reward += r;
        }
        self.transitions += segment.len();
        let terminal = segment.last().is_some_and(|t| t.action.is_termination());
        // an episode stopped by the step cap still bootstraps from the critic
        let bootstrap = if terminal || segment.is_empty() {
            0.0
        } else {
            forward(params, &stream.memory, &stream.encoder.observe(&stream.state.window))?.value
        };
        Ok((segment, terminal, bootstrap))
    }

    fn restart(&mut self, index: usize) {
        let s = &self.streams[index];
        self.window.rewards += s.total_reward;
        self.window.lengths += s.state.t as f64;
        self.window.finals += s.score;
        self.window.episodes += 1;
        self.episodes += 1;
        self.longest_episode = self.longest_episode.max(s.state.t);
        let rng = s.rng.clone();
        let net = *self.params.config();
        self.streams[index] = Stream::start(rng, self.source, net.encoder, net.hidden);
        self.scorer_calls += 1;
    }

    /// Advances every stream by `ticks` steps with the current parameters
    /// and returns the segments in stream order. A stream whose episode ends
    /// starts a new one and keeps stepping, so an episode boundary splits
    /// its steps into two segments.
    pub fn collect(&mut self, ticks: usize) -> Result<Vec<Segment>> {
        let mut segments = Vec::with_capacity(self.streams.len());
        for i in 0..self.streams.len() {
            let mut left = ticks;
            while left > 0 {
                let (transitions, terminal, bootstrap) = self.rollout(i, left)?;
                left -= transitions.len();
                let rewards: Vec<f64> = transitions.iter().map(|t| t.reward).collect();
                let returns = compute_returns(&rewards, terminal, bootstrap, self.config.gamma);
                segments.push(Segment { transitions, returns });
                if self.streams[i].state.terminated {
                    self.restart(i);
                }
            }
        }
        Ok(segments)
    }

    /// Sums the segment gradients, clips the sum and applies one RMSProp
    /// update.
    pub fn apply(&mut self, segments: &[Segment]) -> Result<()> {
        let mut total = self.params.zero_gradients();
        let mut loss = 0.0;
        for s in segments {
            let (l, g) = segment_loss(&self.params, &s.transitions, &s.returns, self.config.beta)?;
            loss += l;
            total.add(&g);
        }
        if !loss.is_finite() || !total.is_finite() {
            return Err(Error::NonFinite { update: self.updates });
        }
        if let Some(clip) = self.config.grad_clip {
            total.clip_norm(clip);
        }
        self.optimizer.step(self.params.as_mut_slice(), &total.data);
        self.updates += 1;
        Ok(())
    }

    /// One lockstep round of `t_max` steps per stream (fewer at the end of
    /// the budget) followed by one update. Returns `false` once the budget
    /// is spent.
    pub fn round(&mut self) -> Result<bool> {
        if self.done() {
            return Ok(false);
        }
        let ticks = self.config.t_max.min(self.config.total_steps - self.env_steps);
        let segments = self.collect(ticks)?;
        self.apply(&segments)?;
        self.env_steps += ticks;
        if self.updates % self.config.log_every == 0 {
            self.flush_log();
        }
        Ok(!self.done())
    }

    fn flush_log(&mut self) {
        let w = core::mem::take(&mut self.window);
        if w.episodes == 0 {
            return;
        }
        let n = w.episodes as f64;
        self.log.push(LogRecord {
            step: self.env_steps,
            mean_reward: w.rewards / n,
            mean_length: w.lengths / n,
            mean_final_score: w.finals / n,
            entropy: w.entropy / w.transitions.max(1) as f64,
        });
    }

    pub fn run(mut self) -> Result<TrainOutcome> {
        while self.round()? {}
        Ok(self.finish())
    }

    pub fn finish(mut self) -> TrainOutcome {
        if self.updates % self.config.log_every != 0 {
            self.flush_log();
        }
        TrainOutcome {
            params: self.params,
            log: self.log,
            env_steps: self.env_steps,
            transitions: self.transitions,
            updates: self.updates,
            episodes: self.episodes,
            scorer_calls: self.scorer_calls,
            longest_episode: self.longest_episode,
        }
    }
}

/// Trains a fresh network to the configured step budget.
pub fn train(
    net: NetConfig,
    config: TrainerConfig,
    reward: RewardConfig,
    source: &dyn TaskSource,
) -> Result<TrainOutcome> {
    Trainer::new(net, config, reward, source)?.run()
}
