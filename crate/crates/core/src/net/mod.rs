//! Recurrent actor-critic network.
//!
//! ```text
//! global raw ──enc──┐
//!                   ├─ concat(2d) ─ trunk(tanh) ─ LSTM ─┬─ policy head ─ softmax(14)
//! local raw  ──enc──┘                                   └─ value head  ─ V
//! ```
//!
//! The encoder projection (linear + tanh) is shared by the global and local
//! paths. With `recurrent = false` the trunk output feeds the heads directly
//! and the recurrent state passes through untouched.
//!
//! Gradients are computed by hand with backpropagation through time over a
//! segment; [`grad_check`] compares them against central finite differences.

mod encoder;
mod gradcheck;
mod params;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

pub use encoder::{encode_observation, EncoderKind, EpisodeEncoder, Observation, COORD_DIM, PATCH_SIDE};
pub use gradcheck::{grad_check, grad_check_against, GradCheckReport};
pub use params::{Gradients, Layout, PolicyParams, TensorSpec};

use crate::env::{Action, NUM_ACTIONS};
use crate::rng::{self, Rng};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NetConfig {
    pub encoder: EncoderKind,
    /// Output size `d` of the encoder projection.
    pub feature_dim: usize,
    pub hidden: usize,
    /// `false` replaces the LSTM by the identity (history-free ablation).
    pub recurrent: bool,
}

/// LSTM hidden and cell vectors. Zero at episode start.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl RecurrentState {
    pub fn zeros(hidden: usize) -> Self {
        Self { h: vec![0.0; hidden], c: vec![0.0; hidden] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyOutput {
    pub logits: [f64; NUM_ACTIONS],
    pub probs: [f64; NUM_ACTIONS],
    pub value: f64,
    pub next_state: RecurrentState,
}

impl PolicyOutput {
    pub fn entropy(&self) -> f64 {
        entropy(&self.probs)
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64; NUM_ACTIONS]) -> [f64; NUM_ACTIONS] {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = [0.0; NUM_ACTIONS];
    let mut sum = 0.0;
    for (o, &z) in out.iter_mut().zip(logits) {
        *o = libm::exp(z - max);
        sum += *o;
    }
    for o in &mut out {
        *o /= sum;
    }
    out
}

fn log_softmax(logits: &[f64; NUM_ACTIONS]) -> [f64; NUM_ACTIONS] {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + libm::log(logits.iter().map(|z| libm::exp(z - max)).sum::<f64>());
    logits.map(|z| z - lse)
}

pub fn entropy(probs: &[f64]) -> f64 {
    -probs.iter().filter(|p| **p > 0.0).map(|p| p * libm::log(*p)).sum::<f64>()
}

/// Categorical draw.
pub fn sample_action(probs: &[f64; NUM_ACTIONS], rng: &mut Rng) -> Action {
    let u = rng::unit(rng);
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return Action::ALL[i];
        }
    }
    Action::ALL[last]
}

/// Argmax with ties broken toward the lowest id.
pub fn greedy_action(probs: &[f64; NUM_ACTIONS]) -> Action {
    let mut best = 0;
    for i in 1..NUM_ACTIONS {
        if probs[i] > probs[best] {
            best = i;
        }
    }
    Action::ALL[best]
}

// Four independent accumulators so the reduction vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

// y = W x + b, W row-major [out x in]
fn affine(w: &[f64], b: &[f64], x: &[f64], out: &mut Vec<f64>) {
    let n = x.len();
    out.clear();
    out.extend(b.iter().enumerate().map(|(i, bi)| bi + dot(&w[i * n..(i + 1) * n], x)));
}

// gw += dy x^T
fn add_outer(gw: &mut [f64], dy: &[f64], x: &[f64]) {
    let n = x.len();
    for (i, d) in dy.iter().enumerate() {
        if *d == 0.0 {
            continue;
        }
        for (g, xj) in gw[i * n..(i + 1) * n].iter_mut().zip(x) {
            *g += d * xj;
        }
    }
}

// dx += W^T dy
fn add_transposed(w: &[f64], dy: &[f64], dx: &mut [f64]) {
    let n = dx.len();
    for (i, d) in dy.iter().enumerate() {
        if *d == 0.0 {
            continue;
        }
        for (o, wij) in dx.iter_mut().zip(&w[i * n..(i + 1) * n]) {
            *o += d * wij;
        }
    }
}

fn add_into(acc: &mut [f64], v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

/// Intermediates of one forward step, kept for the backward pass.
#[derive(Debug, Clone)]
struct StepCache {
    e_global: Vec<f64>,
    e_local: Vec<f64>,
    z: Vec<f64>,
    u: Vec<f64>,
    /// input, forget, cell, output activations (4H)
    gates: Vec<f64>,
    /// `[u; h_prev]`, the LSTM input
    xh: Vec<f64>,
    c_prev: Vec<f64>,
    tanh_c: Vec<f64>,
    h: Vec<f64>,
    c: Vec<f64>,
    logits: [f64; NUM_ACTIONS],
    value: f64,
}

fn check_shapes(params: &PolicyParams, state: &RecurrentState, obs: &Observation) -> Result<()> {
    let cfg = params.config();
    let input = cfg.encoder.input_dim();
    if obs.global.len() != input || obs.local.len() != input {
        return Err(Error::Shape(format!(
            "observation ({}, {}) does not match encoder input {input}",
            obs.global.len(),
            obs.local.len()
        )));
    }
    if state.h.len() != cfg.hidden || state.c.len() != cfg.hidden {
        return Err(Error::Shape(format!(
            "recurrent state ({}, {}) does not match hidden size {}",
            state.h.len(),
            state.c.len(),
            cfg.hidden
        )));
    }
    Ok(())
}

fn step_forward(params: &PolicyParams, state: &RecurrentState, obs: &Observation) -> Result<StepCache> {
    check_shapes(params, state, obs)?;
    let cfg = params.config();
    let l = params.layout();
    let h = cfg.hidden;

    let mut e_global = Vec::new();
    affine(params.slice(&l.enc_w), params.slice(&l.enc_b), &obs.global, &mut e_global);
    e_global.iter_mut().for_each(|v| *v = libm::tanh(*v));
    let mut e_local = Vec::new();
    affine(params.slice(&l.enc_w), params.slice(&l.enc_b), &obs.local, &mut e_local);
    e_local.iter_mut().for_each(|v| *v = libm::tanh(*v));

    let mut z = Vec::with_capacity(2 * cfg.feature_dim);
    z.extend_from_slice(&e_global);
    z.extend_from_slice(&e_local);

    let mut u = Vec::new();
    affine(params.slice(&l.trunk_w), params.slice(&l.trunk_b), &z, &mut u);
    u.iter_mut().for_each(|v| *v = libm::tanh(*v));

    let (gates, xh, tanh_c, hv, c) = if cfg.recurrent {
        let mut xh = Vec::with_capacity(2 * h);
        xh.extend_from_slice(&u);
        xh.extend_from_slice(&state.h);
        let mut gates = Vec::new();
        affine(params.slice(&l.lstm_w), params.slice(&l.lstm_b), &xh, &mut gates);
        for (k, g) in gates.iter_mut().enumerate() {
            *g = if (2 * h..3 * h).contains(&k) { libm::tanh(*g) } else { sigmoid(*g) };
        }
        let mut c = vec![0.0; h];
        let mut tanh_c = vec![0.0; h];
        let mut hv = vec![0.0; h];
        for j in 0..h {
            let (i_g, f_g, g_g, o_g) = (gates[j], gates[h + j], gates[2 * h + j], gates[3 * h + j]);
            c[j] = f_g * state.c[j] + i_g * g_g;
            tanh_c[j] = libm::tanh(c[j]);
            hv[j] = o_g * tanh_c[j];
        }
        (gates, xh, tanh_c, hv, c)
    } else {
        (Vec::new(), Vec::new(), Vec::new(), u.clone(), state.c.clone())
    };

    let mut logits_v = Vec::new();
    affine(params.slice(&l.pi_w), params.slice(&l.pi_b), &hv, &mut logits_v);
    let mut logits = [0.0; NUM_ACTIONS];
    logits.copy_from_slice(&logits_v);
    let value = params.slice(&l.v_b)[0] + dot(params.slice(&l.v_w), &hv);

    Ok(StepCache { e_global, e_local, z, u, gates, xh, c_prev: state.c.clone(), tanh_c, h: hv, c, logits, value })
}

impl StepCache {
    fn next_state(&self, params: &PolicyParams, prev: &RecurrentState) -> RecurrentState {
        if params.config().recurrent {
            RecurrentState { h: self.h.clone(), c: self.c.clone() }
        } else {
            prev.clone()
        }
    }
}

/// One forward step: policy distribution, value and the next recurrent state.
pub fn forward(params: &PolicyParams, state: &RecurrentState, obs: &Observation) -> Result<PolicyOutput> {
    let cache = step_forward(params, state, obs)?;
    Ok(PolicyOutput {
        logits: cache.logits,
        probs: softmax(&cache.logits),
        value: cache.value,
        next_state: cache.next_state(params, state),
    })
}

/// One step of a training segment.
#[derive(Debug, Clone, PartialEq)]
pub struct TapeStep {
    pub observation: Observation,
    pub action: Action,
    /// n-step return `R_t`.
    pub ret: f64,
}

/// A training segment: the recurrent state it started from and its steps.
/// The starting state is treated as a constant (truncated BPTT).
#[derive(Debug, Clone, PartialEq)]
pub struct Tape {
    pub initial: RecurrentState,
    pub steps: Vec<TapeStep>,
}

/// Loss and gradients of one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentGrad {
    pub loss: f64,
    pub grads: Gradients,
    /// `V(s_t)` per step, as seen by the loss.
    pub values: Vec<f64>,
    pub entropies: Vec<f64>,
}

fn run_segment(params: &PolicyParams, tape: &Tape) -> Result<Vec<StepCache>> {
    let mut state = tape.initial.clone();
    let mut caches = Vec::with_capacity(tape.steps.len());
    for step in &tape.steps {
        let cache = step_forward(params, &state, &step.observation)?;
        state = cache.next_state(params, &state);
        caches.push(cache);
    }
    Ok(caches)
}

/// Segment objective with advantages held fixed:
///
/// `sum_t -log pi(a_t) * A_t - beta * H(pi_t) + (R_t - V_t)^2 / 2`
///
/// Its gradient is exactly what [`backward`] returns when `advantages` are
/// the `R_t - V_t` of the current parameters.
pub fn segment_objective(params: &PolicyParams, tape: &Tape, beta: f64, advantages: &[f64]) -> Result<f64> {
    if advantages.len() != tape.steps.len() {
        return Err(Error::Misaligned(format!("{} advantages for {} steps", advantages.len(), tape.steps.len())));
    }
    let caches = run_segment(params, tape)?;
    let mut loss = 0.0;
    for ((cache, step), adv) in caches.iter().zip(&tape.steps).zip(advantages) {
        let logp = log_softmax(&cache.logits);
        let probs = softmax(&cache.logits);
        let td = step.ret - cache.value;
        loss += -logp[step.action.id()] * adv - beta * entropy(&probs) + 0.5 * td * td;
    }
    Ok(loss)
}

/// Advantages `R_t - V_t` under `params`.
pub fn advantages(params: &PolicyParams, tape: &Tape) -> Result<Vec<f64>> {
    Ok(run_segment(params, tape)?.iter().zip(&tape.steps).map(|(c, s)| s.ret - c.value).collect())
}

/// Loss and analytic gradients of a segment by backpropagation through time.
///
/// The advantage multiplying `log pi` is a constant: the policy term sends no
/// gradient into the value head.
pub fn backward(params: &PolicyParams, tape: &Tape, beta: f64) -> Result<SegmentGrad> {
    let caches = run_segment(params, tape)?;
    let cfg = params.config();
    let l = params.layout();
    let (d, h) = (cfg.feature_dim, cfg.hidden);
    let mut grads = params.zero_gradients();
    let g = &mut grads.data;

    let mut loss = 0.0;
    let mut values = Vec::with_capacity(caches.len());
    let mut entropies = Vec::with_capacity(caches.len());
    let mut dh_next = vec![0.0; h];
    let mut dc_next = vec![0.0; h];
    let mut dh = vec![0.0; h];
    let mut da = vec![0.0; 4 * h];
    let mut dxh = vec![0.0; 2 * h];
    let mut du = vec![0.0; h];
    let mut dz = vec![0.0; 2 * d];

    for (cache, step) in caches.iter().zip(&tape.steps).rev() {
        let probs = softmax(&cache.logits);
        let logp = log_softmax(&cache.logits);
        let ent = entropy(&probs);
        let adv = step.ret - cache.value;
        loss += -logp[step.action.id()] * adv - beta * ent + 0.5 * adv * adv;
        values.push(cache.value);
        entropies.push(ent);

        // d loss / d logits
        let mut dlogits = [0.0; NUM_ACTIONS];
        for j in 0..NUM_ACTIONS {
            let onehot = if j == step.action.id() { 1.0 } else { 0.0 };
            dlogits[j] = -adv * (onehot - probs[j]) + beta * probs[j] * (logp[j] + ent);
        }
        let dv = cache.value - step.ret;

        add_outer(&mut g[l.pi_w.clone()], &dlogits, &cache.h);
        add_into(&mut g[l.pi_b.clone()], &dlogits);
        add_outer(&mut g[l.v_w.clone()], &[dv], &cache.h);
        g[l.v_b.start] += dv;

        dh.copy_from_slice(&dh_next);
        add_transposed(params.slice(&l.pi_w), &dlogits, &mut dh);
        add_transposed(params.slice(&l.v_w), &[dv], &mut dh);

        if cfg.recurrent {
            let gates = &cache.gates;
            for j in 0..h {
                let (i_g, f_g, g_g, o_g) = (gates[j], gates[h + j], gates[2 * h + j], gates[3 * h + j]);
                let tc = cache.tanh_c[j];
                let dc = dh[j] * o_g * (1.0 - tc * tc) + dc_next[j];
                let d_o = dh[j] * tc;
                let d_i = dc * g_g;
                let d_g = dc * i_g;
                let d_f = dc * cache.c_prev[j];
                dc_next[j] = dc * f_g;
                da[j] = d_i * i_g * (1.0 - i_g);
                da[h + j] = d_f * f_g * (1.0 - f_g);
                da[2 * h + j] = d_g * (1.0 - g_g * g_g);
                da[3 * h + j] = d_o * o_g * (1.0 - o_g);
            }
            add_outer(&mut g[l.lstm_w.clone()], &da, &cache.xh);
            add_into(&mut g[l.lstm_b.clone()], &da);
            dxh.iter_mut().for_each(|v| *v = 0.0);
            add_transposed(params.slice(&l.lstm_w), &da, &mut dxh);
            du.copy_from_slice(&dxh[..h]);
            dh_next.copy_from_slice(&dxh[h..]);
        } else {
            du.copy_from_slice(&dh);
        }

        // trunk
        for (dj, uj) in du.iter_mut().zip(&cache.u) {
            *dj *= 1.0 - uj * uj;
        }
        add_outer(&mut g[l.trunk_w.clone()], &du, &cache.z);
        add_into(&mut g[l.trunk_b.clone()], &du);
        dz.iter_mut().for_each(|v| *v = 0.0);
        add_transposed(params.slice(&l.trunk_w), &du, &mut dz);

        // shared encoder, global and local paths
        let (dz_global, dz_local) = dz.split_at_mut(d);
        for (path, e, raw) in [
            (dz_global, &cache.e_global, &step.observation.global[..]),
            (dz_local, &cache.e_local, &step.observation.local[..]),
        ] {
            for (dj, ej) in path.iter_mut().zip(e) {
                *dj *= 1.0 - ej * ej;
            }
            add_outer(&mut g[l.enc_w.clone()], path, raw);
            add_into(&mut g[l.enc_b.clone()], path);
        }
    }
    values.reverse();
    entropies.reverse();
    Ok(SegmentGrad { loss, grads, values, entropies })
}
