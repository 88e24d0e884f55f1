//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Tolerances and budgets are the constants below.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use a2rl::pnm;
use a2rl_core::env::{Action, CropWindow, EnvConfig, EpisodeState, ImageDims, EPISODE_CAP, MIN_SIZE};
use a2rl_core::eval::{agent_crop, boundary_displacement, iou, sliding_window_search, topk_max_iou, GridConfig, Rect};
use a2rl_core::image::ImageRaster;
use a2rl_core::net::{forward, grad_check, EncoderKind, NetConfig, Observation, PolicyParams, RecurrentState, Tape, TapeStep};
use a2rl_core::reward::RewardConfig;
use a2rl_core::rng::{self, Rng};
use a2rl_core::scorer::{target_iou_score, AestheticScorer};
use a2rl_core::trainer::{compute_returns, SyntheticTargets, Task, TaskSource, TrainOutcome, Trainer, TrainerConfig};

const GRAD_CONFIGS: usize = 20;
const GRAD_TOL: f64 = 1e-4;
const GRAD_EPS: f64 = 1e-5;
const GRAD_BUDGET: Duration = Duration::from_secs(30);

const RETURN_SEGMENTS: usize = 10_000;
const RETURN_TOL: f64 = 1e-12;
const RETURN_BUDGET: Duration = Duration::from_secs(5);

const REWARD_TUPLES: usize = 10_000;
const MONOTONE_MAPS: usize = 100;
const REWARD_TOL: f64 = 1e-12;
const REWARD_BUDGET: Duration = Duration::from_secs(5);

const FUZZ_SEQUENCES: usize = 100_000;
const FUZZ_BUDGET: Duration = Duration::from_secs(30);

const LEARN_STEPS: usize = 20_000;
const LEARN_SEED: u64 = 0;
const HELD_OUT: usize = 50;
const HELD_OUT_STREAM: u64 = 1 << 40;
const RANDOM_ROLLOUTS: usize = 20;
const LEARN_MIN_IOU: f64 = 0.55;
const LEARN_MIN_MARGIN: f64 = 0.15;
const LEARN_BUDGET: Duration = Duration::from_secs(600);

const EFFICIENCY_RATIO: f64 = 3.0;
const EFFICIENCY_BUDGET: Duration = Duration::from_secs(60);

const TOPK_INSTANCES: usize = 1_000;
const FIXTURE_TOL: f64 = 1e-15;

const ABLATION_CASES: usize = 10_000;

const DETERMINISM_STEPS: &str = "400";

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, name: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn gradients(rng: &mut Rng) -> (bool, String) {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for i in 0..GRAD_CONFIGS {
        let encoder = if i % 4 == 3 { EncoderKind::Pixel } else { EncoderKind::Coordinate };
        let config = NetConfig { encoder, feature_dim: 8, hidden: 16, recurrent: i % 2 == 0 };
        let mut params = PolicyParams::init(config, rng).unwrap();
        for v in params.as_mut_slice() {
            *v += rng::uniform(rng, -0.3, 0.3);
        }
        let dim = encoder.input_dim();
        let global: Arc<[f64]> = (0..dim).map(|_| rng::uniform(rng, -1.0, 1.0)).collect();
        let steps = (0..5)
            .map(|_| TapeStep {
                observation: Observation {
                    global: Arc::clone(&global),
                    local: (0..dim).map(|_| rng::uniform(rng, -1.0, 1.0)).collect(),
                },
                action: Action::ALL[rng::index(rng, 14)],
                ret: rng::uniform(rng, -2.0, 2.0),
            })
            .collect();
        let initial = RecurrentState {
            h: (0..16).map(|_| rng::uniform(rng, -0.5, 0.5)).collect(),
            c: (0..16).map(|_| rng::uniform(rng, -0.5, 0.5)).collect(),
        };
        let report = grad_check(&params, &Tape { initial, steps }, 0.05, GRAD_EPS).unwrap();
        worst = worst.max(report.max_relative_error);
    }
    let took = start.elapsed();
    (
        worst < GRAD_TOL && took < GRAD_BUDGET,
        format!("max rel err {worst:.2e} < {GRAD_TOL:e} over {GRAD_CONFIGS} configs (d=8, h=16, 5 steps, eps {GRAD_EPS:e}); {took:.2?} < {GRAD_BUDGET:?}"),
    )
}

fn returns(rng: &mut Rng) -> (bool, String) {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..RETURN_SEGMENTS {
        let k = 1 + rng::index(rng, 10);
        let gamma = [0.0, 0.5, 0.99, 1.0][rng::index(rng, 4)];
        let rewards: Vec<f64> = (0..k).map(|_| rng::uniform(rng, -5.0, 5.0)).collect();
        let terminal = rng::index(rng, 2) == 0;
        let bootstrap = rng::uniform(rng, -10.0, 10.0);
        let got = compute_returns(&rewards, terminal, bootstrap, gamma);
        for t in 0..k {
            let mut expected = 0.0;
            for i in 0..k - t {
                expected += gamma.powi(i as i32) * rewards[t + i];
            }
            if !terminal {
                expected += gamma.powi((k - t) as i32) * bootstrap;
            }
            worst = worst.max((got[t] - expected).abs());
        }
    }
    let took = start.elapsed();
    (
        worst <= RETURN_TOL && took < RETURN_BUDGET,
        format!("max abs err {worst:.2e} <= {RETURN_TOL:e} on {RETURN_SEGMENTS} segments; {took:.2?} < {RETURN_BUDGET:?}"),
    )
}

fn hand_reward(cfg: &RewardConfig, prev: f64, new: f64, t: usize, ar: f64) -> f64 {
    let sign = if new > prev {
        1.0
    } else if new < prev {
        -1.0
    } else {
        0.0
    };
    let penalty = if ar < cfg.ar_low || ar > cfg.ar_high { cfg.nr } else { 0.0 };
    sign - cfg.step_penalty * (t as f64 + 1.0) + penalty
}

fn reward(rng: &mut Rng) -> (bool, String) {
    let start = Instant::now();
    let cfg = RewardConfig::default();
    let mut worst: f64 = 0.0;
    let (mut ties, mut boundaries) = (0, 0);
    for i in 0..REWARD_TUPLES {
        let prev = rng::uniform(rng, -1.0, 1.0);
        let new = if i % 10 == 0 { prev } else { rng::uniform(rng, -1.0, 1.0) };
        ties += usize::from(new == prev);
        let ar = match i % 10 {
            1 => cfg.ar_low,
            2 => cfg.ar_high,
            _ => rng::uniform(rng, 0.1, 4.0),
        };
        boundaries += usize::from(ar == cfg.ar_low || ar == cfg.ar_high);
        let t = rng::index(rng, 50);
        worst = worst.max((cfg.full_reward(prev, new, t, ar) - hand_reward(&cfg, prev, new, t, ar)).abs());
    }
    let mut invariant = true;
    for _ in 0..MONOTONE_MAPS {
        let (a, k, b, c) = (rng::uniform(rng, 0.1, 10.0), rng::uniform(rng, 0.1, 10.0), rng::uniform(rng, 0.0, 2.0), rng::uniform(rng, -50.0, 50.0));
        let f = |s: f64| a * (k * s).atan() + b * s + c;
        for j in 0..100 {
            let prev = rng::uniform(rng, 0.0, 1.0);
            let new = if j % 5 == 0 { prev } else { rng::uniform(rng, 0.0, 1.0) };
            let t = rng::index(rng, 50);
            let ar = rng::uniform(rng, 0.1, 4.0);
            invariant &= cfg.full_reward(prev, new, t, ar) == cfg.full_reward(f(prev), f(new), t, ar);
        }
    }
    let took = start.elapsed();
    (
        worst <= REWARD_TOL && invariant && took < REWARD_BUDGET,
        format!(
            "max err {worst:.2e} <= {REWARD_TOL:e} on {REWARD_TUPLES} tuples ({ties} ties, {boundaries} boundary ratios); \
             invariant under {MONOTONE_MAPS} monotone maps: {invariant}; {took:.2?} < {REWARD_BUDGET:?}"
        ),
    )
}

fn env_fuzz(rng: &mut Rng) -> (bool, String) {
    let start = Instant::now();
    let env = EnvConfig::default();
    let stop = Action::ALL.into_iter().find(|a| a.is_termination()).unwrap();
    let moves: Vec<Action> = Action::ALL.into_iter().filter(|a| !a.is_termination()).collect();
    let (mut violations, mut longest, mut capped) = (0usize, 0usize, 0usize);
    for _ in 0..FUZZ_SEQUENCES {
        let dims = ImageDims::new(1 + rng::index(rng, 2000) as u32, 1 + rng::index(rng, 2000) as u32);
        let len = 1 + rng::index(rng, 60);
        let mut state = EpisodeState::start(dims);
        for _ in 0..len {
            // termination is rare so that many episodes reach the cap
            let action = if rng::index(rng, 100) == 0 { stop } else { moves[rng::index(rng, moves.len())] };
            if state.terminated {
                violations += usize::from(state.step(action, &env).is_ok());
                break;
            }
            let before = state.window;
            state = state.step(action, &env).unwrap();
            let w = state.window;
            let ok = w.x >= 0.0
                && w.y >= 0.0
                && w.right() <= 1.0 + 1e-12
                && w.bottom() <= 1.0 + 1e-12
                && w.w >= MIN_SIZE - 1e-9
                && w.h >= MIN_SIZE - 1e-9
                && (!action.is_termination() || (w == before && state.terminated))
                && state.t <= EPISODE_CAP
                && (state.t < EPISODE_CAP || state.terminated);
            violations += usize::from(!ok);
        }
        longest = longest.max(state.t);
        capped += usize::from(state.t == EPISODE_CAP);
    }
    let took = start.elapsed();
    (
        violations == 0 && longest <= EPISODE_CAP && took < FUZZ_BUDGET,
        format!(
            "{violations} violations in {FUZZ_SEQUENCES} sequences; longest episode {longest} <= {EPISODE_CAP} \
             ({capped} hit the cap); {took:.2?} < {FUZZ_BUDGET:?}"
        ),
    )
}

struct Learned {
    outcome: TrainOutcome,
    targets: Vec<CropWindow>,
    took: Duration,
}

fn held_out_targets(source: &SyntheticTargets) -> Vec<CropWindow> {
    let mut r = rng::stream(LEARN_SEED, HELD_OUT_STREAM);
    (0..HELD_OUT).map(|_| source.sample_target(&mut r)).collect()
}

fn learn() -> Learned {
    let source = SyntheticTargets::default();
    let net = NetConfig { encoder: EncoderKind::Coordinate, ..NetConfig::default() };
    let config = TrainerConfig { total_steps: LEARN_STEPS, seed: LEARN_SEED, ..TrainerConfig::default() };
    let start = Instant::now();
    let outcome = Trainer::new(net, config, RewardConfig::default(), &source).unwrap().run().unwrap();
    Learned { outcome, targets: held_out_targets(&source), took: start.elapsed() }
}

fn learning_sanity(learned: &Learned, rng: &mut Rng) -> (bool, String) {
    let source = SyntheticTargets::default();
    let env = EnvConfig::default();
    let mut agent = 0.0;
    let mut random = 0.0;
    for target in &learned.targets {
        let task = source.task_for(*target);
        let crop = agent_crop(&learned.outcome.params, &task.image, &env).unwrap();
        agent += target_iou_score(&crop.window, target);
        for _ in 0..RANDOM_ROLLOUTS {
            let mut state = EpisodeState::start(source.dims);
            while !state.terminated {
                state = state.step(Action::ALL[rng::index(rng, 14)], &env).unwrap();
            }
            random += target_iou_score(&state.window, target);
        }
    }
    let n = learned.targets.len() as f64;
    let (agent, random) = (agent / n, random / (n * RANDOM_ROLLOUTS as f64));
    let took = learned.took;
    (
        agent >= LEARN_MIN_IOU && agent - random >= LEARN_MIN_MARGIN && took < LEARN_BUDGET,
        format!(
            "greedy IoU {agent:.4} >= {LEARN_MIN_IOU} and random-policy IoU {random:.4} + {LEARN_MIN_MARGIN} = {:.4} \
             on {HELD_OUT} held-out targets after {} steps (coordinate encoder, defaults, seed {LEARN_SEED}); \
             training {took:.1?} < {LEARN_BUDGET:?}",
            random + LEARN_MIN_MARGIN,
            learned.outcome.env_steps
        ),
    )
}

/// Wraps a scorer and counts every call.
struct Counting<S> {
    inner: S,
    calls: Arc<AtomicUsize>,
}

impl<S: AestheticScorer> AestheticScorer for Counting<S> {
    fn score(&self, image: &ImageRaster, window: &CropWindow) -> f64 {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.score(image, window)
    }
}

struct CountingSource {
    inner: SyntheticTargets,
    calls: Arc<AtomicUsize>,
}

impl TaskSource for CountingSource {
    fn sample(&self, rng: &mut Rng) -> Task {
        let task = self.inner.sample(rng);
        Task { image: task.image, scorer: Arc::new(Counting { inner: task.scorer, calls: Arc::clone(&self.calls) }) }
    }
}

fn efficiency(learned: &Learned) -> (bool, String) {
    let start = Instant::now();
    let source = SyntheticTargets::default();
    let env = EnvConfig::default();
    let grid = GridConfig::default_preset();
    let (mut steps, mut agent_calls, mut windows, mut search_exact) = (0usize, 0usize, 0usize, true);
    for target in &learned.targets {
        let task = source.task_for(*target);
        let crop = agent_crop(&learned.outcome.params, &task.image, &env).unwrap();
        steps += crop.steps;
        agent_calls += crop.scorer_calls;
        let calls = Arc::new(AtomicUsize::new(0));
        let counted = Counting { inner: Arc::clone(&task.scorer), calls: Arc::clone(&calls) };
        let result = sliding_window_search(&task.image, &counted, &grid);
        let generated = grid.windows(task.image.dims()).len();
        search_exact &= result.scorer_calls == calls.load(Ordering::Relaxed) && result.scorer_calls == generated;
        windows += generated;
    }
    let n = learned.targets.len() as f64;
    let (avg_steps, avg_windows) = (steps as f64 / n, windows as f64 / n);

    // training reports exactly the calls its scorers received
    let calls = Arc::new(AtomicUsize::new(0));
    let counting = CountingSource { inner: source, calls: Arc::clone(&calls) };
    let net = NetConfig { encoder: EncoderKind::Coordinate, feature_dim: 8, hidden: 16, recurrent: true };
    let config = TrainerConfig { total_steps: 300, batch_size: 8, seed: 4, ..TrainerConfig::default() };
    let outcome = Trainer::new(net, config, RewardConfig::default(), &counting).unwrap().run().unwrap();
    let train_exact = outcome.scorer_calls == calls.load(Ordering::Relaxed);
    let took = start.elapsed();
    (
        avg_steps <= EPISODE_CAP as f64
            && avg_steps * EFFICIENCY_RATIO <= avg_windows
            && agent_calls == 0
            && search_exact
            && train_exact
            && took < EFFICIENCY_BUDGET,
        format!(
            "agent avg steps {avg_steps:.2} <= {EPISODE_CAP} and <= default-grid windows {avg_windows:.1} / {EFFICIENCY_RATIO}; \
             agent scorer calls {agent_calls}, grid calls exact: {search_exact}, training calls exact: {train_exact} ({}); \
             {took:.2?} < {EFFICIENCY_BUDGET:?}",
            outcome.scorer_calls
        ),
    )
}

fn random_rect(rng: &mut Rng) -> Rect {
    Rect::new(rng::uniform(rng, 0.0, 100.0), rng::uniform(rng, 0.0, 100.0), rng::uniform(rng, 0.5, 100.0), rng::uniform(rng, 0.5, 100.0))
}

fn metrics(rng: &mut Rng) -> (bool, String) {
    let full = Rect::new(0.0, 0.0, 100.0, 100.0);
    let dims = ImageDims::new(100, 100);
    let close = |a: f64, b: f64| (a - b).abs() <= FIXTURE_TOL;
    let fixtures = [
        close(iou(&full, &full), 1.0),
        iou(&full, &Rect::new(200.0, 0.0, 10.0, 10.0)) == 0.0,
        close(iou(&full, &Rect::new(50.0, 0.0, 100.0, 100.0)), 1.0 / 3.0),
        boundary_displacement(&full, &full, dims) == 0.0,
        close(boundary_displacement(&full, &Rect::new(5.0, 5.0, 90.0, 90.0), dims), 0.05),
        boundary_displacement(&full, &Rect::new(5.0, 5.0, 90.0, 90.0), dims)
            == boundary_displacement(&Rect::new(5.0, 5.0, 90.0, 90.0), &full, dims),
        close(topk_max_iou(&[full], &[Rect::new(1.0, 1.0, 5.0, 5.0), full], 1), 1.0),
        {
            let cands = [Rect::new(0.0, 0.0, 20.0, 100.0), Rect::new(0.0, 0.0, 70.0, 100.0), Rect::new(0.0, 0.0, 50.0, 100.0)];
            close(topk_max_iou(&cands, &[full], 3), 0.7) && close(topk_max_iou(&cands, &[full], 1), 0.2)
        },
    ];
    let fixtures_ok = fixtures.iter().filter(|ok| **ok).count();
    let mut monotone = 0;
    for _ in 0..TOPK_INSTANCES {
        let cands: Vec<Rect> = (0..1 + rng::index(rng, 12)).map(|_| random_rect(rng)).collect();
        let gts: Vec<Rect> = (0..1 + rng::index(rng, 10)).map(|_| random_rect(rng)).collect();
        let values: Vec<f64> = (1..=cands.len() + 1).map(|k| topk_max_iou(&cands, &gts, k)).collect();
        monotone += usize::from(values.windows(2).all(|w| w[0] <= w[1]));
    }
    (
        fixtures_ok == fixtures.len() && monotone == TOPK_INSTANCES,
        format!(
            "{fixtures_ok}/{} hand fixtures within {FIXTURE_TOL:e}; top-K nondecreasing on {monotone}/{TOPK_INSTANCES} instances",
            fixtures.len()
        ),
    )
}

fn random_observation(rng: &mut Rng, dim: usize, global: &Arc<[f64]>) -> Observation {
    Observation { global: Arc::clone(global), local: (0..dim).map(|_| rng::uniform(rng, -1.0, 1.0)).collect() }
}

fn final_output(params: &PolicyParams, history: &[&Observation], query: &Observation) -> ([f64; 14], f64) {
    let mut state = RecurrentState::zeros(params.config().hidden);
    for obs in history {
        state = forward(params, &state, obs).unwrap().next_state;
    }
    let out = forward(params, &state, query).unwrap();
    (out.probs, out.value)
}

fn ablations(rng: &mut Rng) -> (bool, String) {
    let dim = EncoderKind::Coordinate.input_dim();
    let (mut independent, mut recurrent_differs) = (0, 0);
    const NETS: usize = 20;
    for _ in 0..NETS {
        let global: Arc<[f64]> = (0..dim).map(|_| rng::uniform(rng, -1.0, 1.0)).collect();
        let history: Vec<Observation> = (0..6).map(|_| random_observation(rng, dim, &global)).collect();
        let query = random_observation(rng, dim, &global);
        let forward_order: Vec<&Observation> = history.iter().collect();
        let mut permuted = forward_order.clone();
        for i in (1..permuted.len()).rev() {
            permuted.swap(i, rng::index(rng, i + 1));
        }
        permuted.reverse();
        let mut check = |recurrent: bool| {
            let net = NetConfig { encoder: EncoderKind::Coordinate, feature_dim: 8, hidden: 16, recurrent };
            let mut params = PolicyParams::init(net, rng).unwrap();
            for v in params.as_mut_slice() {
                *v += rng::uniform(rng, -0.5, 0.5);
            }
            let a = final_output(&params, &forward_order, &query);
            let b = final_output(&params, &permuted, &query);
            let c = final_output(&params, &[], &query);
            a == b && a == c
        };
        independent += usize::from(check(false));
        recurrent_differs += usize::from(!check(true));
    }
    let cfg = RewardConfig { nr: 0.0, ..RewardConfig::default() };
    let mut equal = 0;
    for i in 0..ABLATION_CASES {
        let (prev, new) = (rng::uniform(rng, -1.0, 1.0), rng::uniform(rng, -1.0, 1.0));
        let ar = match i % 4 {
            0 => rng::uniform(rng, 1e-3, cfg.ar_low),
            1 => rng::uniform(rng, cfg.ar_high, 1e3),
            _ => rng::uniform(rng, 1e-3, 1e3),
        };
        let t = rng::index(rng, 50);
        equal += usize::from(cfg.full_reward(prev, new, t, ar) == cfg.base_reward(prev, new, t));
    }
    (
        independent == NETS && recurrent_differs == NETS && equal == ABLATION_CASES,
        format!(
            "no-recurrent output identical under permuted and empty history for {independent}/{NETS} nets \
             (recurrent nets differ: {recurrent_differs}/{NETS}); nr 0 full == base on {equal}/{ABLATION_CASES} inputs"
        ),
    )
}

fn cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_a2rl")).args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

/// Drops the trailing wall-clock column of every row.
fn without_time(table: &str) -> String {
    table.lines().map(|l| l.rsplit_once('\t').map_or(l, |(head, _)| head)).collect::<Vec<_>>().join("\n")
}

fn one_run(dir: &Path, images: &Path, annotations: &Path) -> Result<(Vec<u8>, String, String), String> {
    let ck = dir.join("agent.ck");
    let ck = ck.to_str().unwrap();
    cli(&["train", "--scorer", "composition", "--images", images.to_str().unwrap(), "--encoder", "coordinate", "--hidden", "16", "--feature-dim", "8", "--steps", DETERMINISM_STEPS, "--batch", "8", "--seed", "21", "--out", ck])?;
    let eval = cli(&["eval", "--checkpoint", ck, "--annotations", annotations.to_str().unwrap(), "--images", images.to_str().unwrap()])?;
    let bench = cli(&["bench", "--checkpoint", ck, "--images", images.to_str().unwrap()])?;
    Ok((fs::read(ck).map_err(|e| e.to_string())?, eval, bench))
}

fn determinism() -> (bool, String) {
    let root = tempfile::tempdir().unwrap();
    let images = root.path().join("images");
    fs::create_dir(&images).unwrap();
    let mut annotations = String::new();
    for (i, (w, h)) in [(48u32, 32u32), (32, 48), (40, 40)].into_iter().enumerate() {
        let target = CropWindow { x: 0.1 * i as f64, y: 0.2, w: 0.5, h: 0.6 };
        let image = ImageRaster::render_window(w, h, &target).unwrap();
        fs::write(images.join(format!("img{i}.pgm")), pnm::encode(&image)).unwrap();
        let px = target.to_pixel_rect(image.dims());
        annotations.push_str(&format!("img{i}.pgm\t{px}\t0 0 {w} {h}\n"));
    }
    let ann = root.path().join("gt.tsv");
    fs::write(&ann, annotations).unwrap();
    let (a, b) = (root.path().join("a"), root.path().join("b"));
    fs::create_dir(&a).unwrap();
    fs::create_dir(&b).unwrap();
    match (one_run(&a, &images, &ann), one_run(&b, &images, &ann)) {
        (Ok(x), Ok(y)) => {
            let same_ck = x.0 == y.0;
            let same_eval = without_time(&x.1) == without_time(&y.1);
            let same_bench = without_time(&x.2) == without_time(&y.2);
            (
                same_ck && same_eval && same_bench,
                format!(
                    "checkpoints byte-identical: {same_ck} ({} bytes); eval tables equal: {same_eval}; \
                     bench tables equal: {same_bench} (time columns excluded)",
                    x.0.len()
                ),
            )
        }
        (Err(e), _) | (_, Err(e)) => (false, format!("run failed: {}", e.trim())),
    }
}

fn main() -> ExitCode {
    let mut report = Report { failures: 0 };
    let mut rng = rng::seeded(20_240_601);
    let (ok, detail) = gradients(&mut rng);
    report.line("gradient-correctness", ok, detail);
    let (ok, detail) = returns(&mut rng);
    report.line("return-oracle", ok, detail);
    let (ok, detail) = reward(&mut rng);
    report.line("reward-closed-form", ok, detail);
    let (ok, detail) = env_fuzz(&mut rng);
    report.line("env-fuzz", ok, detail);
    let learned = learn();
    let (ok, detail) = learning_sanity(&learned, &mut rng);
    report.line("learning-sanity", ok, detail);
    let (ok, detail) = efficiency(&learned);
    report.line("efficiency", ok, detail);
    let (ok, detail) = metrics(&mut rng);
    report.line("metric-fixtures", ok, detail);
    let (ok, detail) = ablations(&mut rng);
    report.line("ablation-switches", ok, detail);
    let (ok, detail) = determinism();
    report.line("determinism", ok, detail);
    if report.failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{} criteria failed", report.failures);
        ExitCode::FAILURE
    }
}
