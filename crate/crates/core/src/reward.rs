//! Aesthetics-aware reward.
//!
//! `r = sign(s_new - s_prev) - c * (t + 1)`, plus `nr` when the new window's
//! aspect ratio leaves `[ar_low, ar_high]`. Boundary ratios are not penalized.

use alloc::format;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardConfig {
    /// Aspect-ratio penalty, added when the ratio is out of range. `0` disables it.
    pub nr: f64,
    pub step_penalty: f64,
    pub ar_low: f64,
    pub ar_high: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self { nr: -5.0, step_penalty: 0.001, ar_low: 0.5, ar_high: 2.0 }
    }
}

/// Sign with `sign(0) = 0`.
pub fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.nr <= 0.0) {
            return Err(Error::Config(format!("nr must be <= 0, got {}", self.nr)));
        }
        if !(self.step_penalty >= 0.0) {
            return Err(Error::Config(format!("step penalty must be >= 0, got {}", self.step_penalty)));
        }
        if !(0.0 < self.ar_low && self.ar_low < self.ar_high) {
            return Err(Error::Config(format!("need 0 < ar_low < ar_high, got [{}, {}]", self.ar_low, self.ar_high)));
        }
        Ok(())
    }

    pub fn base_reward(&self, score_prev: f64, score_new: f64, t: usize) -> f64 {
        sign(score_new - score_prev) - self.step_penalty * (t as f64 + 1.0)
    }

    pub fn aspect_penalty(&self, ar: f64) -> f64 {
        if ar < self.ar_low || ar > self.ar_high {
            self.nr
        } else {
            0.0
        }
    }

    pub fn full_reward(&self, score_prev: f64, score_new: f64, t: usize, ar: f64) -> f64 {
        self.base_reward(score_prev, score_new, t) + self.aspect_penalty(ar)
    }

    /// Immediate reward of the termination action: the window is unchanged,
    /// so only the step penalty applies.
    pub fn termination_reward(&self, t: usize) -> f64 {
        -self.step_penalty * (t as f64 + 1.0)
    }
}
