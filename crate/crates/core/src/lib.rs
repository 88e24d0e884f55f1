//! Aesthetics-driven crop-window search as a sequential decision process.
//!
//! An agent starts from the full-image window and transforms it with one of
//! fourteen discrete actions per step until it picks the termination action
//! or hits the step cap. Rewards are the sign of the change in an aesthetics
//! score, minus a growing step penalty and an aspect-ratio penalty. The agent
//! is a small recurrent actor-critic network trained with n-step advantage
//! actor-critic and RMSProp.
//!
//! The crate is `no_std` (with `alloc`). Image decoding, checkpoint files and
//! the command-line front end live in the companion `a2rl` crate.
//!
//! # Modules
//!
//! - [`env`]: crop window, action table, episode state machine.
//! - [`image`] and [`scorer`]: rasters and pluggable aesthetics scorers.
//! - [`reward`]: sign-clipped score-delta reward with penalties.
//! - [`net`]: observation encoders and the recurrent actor-critic network
//!   with hand-written backpropagation through time.
//! - [`trainer`]: returns, segment losses, RMSProp and the batched training
//!   loop.
//! - [`eval`]: IoU, boundary displacement, top-K IoU, sliding-window
//!   baseline, greedy agent rollout and dataset reports.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod env;
mod error;
pub mod eval;
pub mod image;
pub mod net;
pub mod optim;
pub mod reward;
pub mod rng;
pub mod scorer;
pub mod trainer;

pub use error::{Error, Result};
