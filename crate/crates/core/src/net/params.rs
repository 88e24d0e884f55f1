use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use super::{EncoderKind, NetConfig};
use crate::env::NUM_ACTIONS;
use crate::rng::{self, Rng};
use crate::{Error, Result};

/// Named tensor inside the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorSpec {
    pub name: &'static str,
    pub shape: [usize; 2],
    pub range: Range<usize>,
}

/// Offsets of every tensor in the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub enc_w: Range<usize>,
    pub enc_b: Range<usize>,
    pub trunk_w: Range<usize>,
    pub trunk_b: Range<usize>,
    pub lstm_w: Range<usize>,
    pub lstm_b: Range<usize>,
    pub pi_w: Range<usize>,
    pub pi_b: Range<usize>,
    pub v_w: Range<usize>,
    pub v_b: Range<usize>,
    pub len: usize,
}

impl Layout {
    pub fn new(config: &NetConfig) -> Self {
        let (input, d, h) = (config.encoder.input_dim(), config.feature_dim, config.hidden);
        let mut at = 0;
        let mut take = |n: usize| {
            let r = at..at + n;
            at += n;
            r
        };
        let enc_w = take(d * input);
        let enc_b = take(d);
        let trunk_w = take(h * 2 * d);
        let trunk_b = take(h);
        let (lstm_w, lstm_b) = if config.recurrent { (take(4 * h * 2 * h), take(4 * h)) } else { (take(0), take(0)) };
        let pi_w = take(NUM_ACTIONS * h);
        let pi_b = take(NUM_ACTIONS);
        let v_w = take(h);
        let v_b = take(1);
        let len = v_b.end;
        Self { enc_w, enc_b, trunk_w, trunk_b, lstm_w, lstm_b, pi_w, pi_b, v_w, v_b, len }
    }

    /// Tensor list in storage order. Recurrent tensors are omitted when the
    /// cell is disabled.
    pub fn tensors(&self, config: &NetConfig) -> Vec<TensorSpec> {
        let (input, d, h) = (config.encoder.input_dim(), config.feature_dim, config.hidden);
        let mut out = vec![
            TensorSpec { name: "encoder.weight", shape: [d, input], range: self.enc_w.clone() },
            TensorSpec { name: "encoder.bias", shape: [d, 1], range: self.enc_b.clone() },
            TensorSpec { name: "trunk.weight", shape: [h, 2 * d], range: self.trunk_w.clone() },
            TensorSpec { name: "trunk.bias", shape: [h, 1], range: self.trunk_b.clone() },
        ];
        if config.recurrent {
            out.push(TensorSpec { name: "lstm.weight", shape: [4 * h, 2 * h], range: self.lstm_w.clone() });
            out.push(TensorSpec { name: "lstm.bias", shape: [4 * h, 1], range: self.lstm_b.clone() });
        }
        out.push(TensorSpec { name: "policy.weight", shape: [NUM_ACTIONS, h], range: self.pi_w.clone() });
        out.push(TensorSpec { name: "policy.bias", shape: [NUM_ACTIONS, 1], range: self.pi_b.clone() });
        out.push(TensorSpec { name: "value.weight", shape: [1, h], range: self.v_w.clone() });
        out.push(TensorSpec { name: "value.bias", shape: [1, 1], range: self.v_b.clone() });
        out
    }
}

/// All learnable tensors of the actor-critic network, stored flat.
///
/// Actor and critic share the encoder, trunk and recurrent cell; only the
/// two heads are separate.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    config: NetConfig,
    layout: Layout,
    data: Vec<f64>,
}

impl PolicyParams {
    pub fn zeros(config: NetConfig) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config);
        let data = vec![0.0; layout.len];
        Ok(Self { config, layout, data })
    }

    /// Uniform `[-k, k]` with `k = 1 / sqrt(fan_in)`, forget-gate bias 1,
    /// heads scaled by 0.01 with zero bias.
    pub fn init(config: NetConfig, rng: &mut Rng) -> Result<Self> {
        let mut params = Self::zeros(config)?;
        let (input, d, h) = (config.encoder.input_dim(), config.feature_dim, config.hidden);
        let l = params.layout.clone();
        let fill = |data: &mut [f64], r: &Range<usize>, fan_in: usize, scale: f64, rng: &mut Rng| {
            let k = 1.0 / libm::sqrt(fan_in as f64);
            for v in &mut data[r.clone()] {
                *v = scale * rng::uniform(rng, -k, k);
            }
        };
        let data = &mut params.data;
        fill(data, &l.enc_w, input, 1.0, rng);
        fill(data, &l.enc_b, input, 1.0, rng);
        fill(data, &l.trunk_w, 2 * d, 1.0, rng);
        fill(data, &l.trunk_b, 2 * d, 1.0, rng);
        if config.recurrent {
            fill(data, &l.lstm_w, 2 * h, 1.0, rng);
            fill(data, &l.lstm_b, 2 * h, 1.0, rng);
            // gate blocks are ordered input, forget, cell, output
            for v in &mut data[l.lstm_b.start + h..l.lstm_b.start + 2 * h] {
                *v = 1.0;
            }
        }
        fill(data, &l.pi_w, h, 0.01, rng);
        fill(data, &l.v_w, h, 0.01, rng);
        Ok(params)
    }

    /// Rebuilds parameters from a flat vector, e.g. a decoded checkpoint.
    pub fn from_vec(config: NetConfig, data: Vec<f64>) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config);
        if data.len() != layout.len {
            return Err(Error::Shape(format!("expected {} parameters, got {}", layout.len, data.len())));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("non-finite parameter".into()));
        }
        Ok(Self { config, layout, data })
    }

    pub fn config(&self) -> &NetConfig {
        &self.config
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn tensors(&self) -> Vec<TensorSpec> {
        self.layout.tensors(&self.config)
    }

    pub(crate) fn slice(&self, r: &Range<usize>) -> &[f64] {
        &self.data[r.clone()]
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients { data: vec![0.0; self.data.len()] }
    }
}

/// Gradient buffer laid out like [`PolicyParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub data: Vec<f64>,
}

impl Gradients {
    pub fn add(&mut self, other: &Gradients) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|g| g * g).sum())
    }

    pub fn scale(&mut self, factor: f64) {
        for g in &mut self.data {
            *g *= factor;
        }
    }

    /// Rescales to `max_norm` when the global norm exceeds it. Returns the
    /// norm before clipping.
    pub fn clip_norm(&mut self, max_norm: f64) -> f64 {
        let norm = self.norm();
        if norm > max_norm && norm > 0.0 {
            self.scale(max_norm / norm);
        }
        norm
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|g| g.is_finite())
    }
}

impl NetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.feature_dim == 0 || self.hidden == 0 {
            return Err(Error::Config(format!(
                "feature_dim and hidden must be positive, got {} and {}",
                self.feature_dim, self.hidden
            )));
        }
        Ok(())
    }
}

impl Default for NetConfig {
    fn default() -> Self {
        Self { encoder: EncoderKind::Pixel, feature_dim: 64, hidden: 128, recurrent: true }
    }
}
