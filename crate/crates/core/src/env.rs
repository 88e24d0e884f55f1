//! Crop-window state machine.
//!
//! Windows live on the unit square: `x`/`w` are fractions of the image width,
//! `y`/`h` fractions of its height. Every action moves edges by a fixed
//! fraction of the original image size, never of the current window.

use alloc::format;
use core::fmt;

use crate::{Error, Result};

/// Edge displacement per action as a fraction of the original image size.
pub const STEP: f64 = 0.05;
/// Smallest allowed window side as a fraction of the image side.
pub const MIN_SIZE: f64 = 0.1;
/// Maximum number of actions per episode.
pub const EPISODE_CAP: usize = 50;
pub const NUM_ACTIONS: usize = 14;

// Slack on the minimum-size test so a 0.15 window can still shrink to 0.1
// despite 0.15 - 0.05 rounding below 0.1.
const SIZE_SLACK: f64 = 1e-9;

/// Image size in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ImageDims {
    pub width: u32,
    pub height: u32,
}

impl ImageDims {
    pub const fn new(width: u32, height: u32) -> Self {
        Self { width, height }
    }
}

/// Integer pixel rectangle, origin at the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PixelRect {
    pub left: u32,
    pub top: u32,
    pub width: u32,
    pub height: u32,
}

impl PixelRect {
    pub const fn new(left: u32, top: u32, width: u32, height: u32) -> Self {
        Self { left, top, width, height }
    }

    pub fn right(&self) -> u32 {
        self.left + self.width
    }

    pub fn bottom(&self) -> u32 {
        self.top + self.height
    }

    pub fn fits(&self, dims: ImageDims) -> bool {
        self.width > 0
            && self.height > 0
            && self.right() <= dims.width
            && self.bottom() <= dims.height
    }
}

impl fmt::Display for PixelRect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.left, self.top, self.width, self.height)
    }
}

/// Normalized axis-aligned crop window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropWindow {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl CropWindow {
    pub const FULL: CropWindow = CropWindow { x: 0.0, y: 0.0, w: 1.0, h: 1.0 };

    /// Checked constructor using the default minimum size.
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        let window = Self { x, y, w, h };
        if window.is_valid(MIN_SIZE, MIN_SIZE) {
            Ok(window)
        } else {
            Err(Error::InvalidWindow(format!("({x}, {y}, {w}, {h})")))
        }
    }

    /// Builds a window from pixel coordinates without size checks.
    pub fn from_pixels(rect: PixelRect, dims: ImageDims) -> Self {
        Self {
            x: rect.left as f64 / dims.width as f64,
            y: rect.top as f64 / dims.height as f64,
            w: rect.width as f64 / dims.width as f64,
            h: rect.height as f64 / dims.height as f64,
        }
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn is_valid(&self, min_w: f64, min_h: f64) -> bool {
        let finite = self.x.is_finite() && self.y.is_finite() && self.w.is_finite() && self.h.is_finite();
        finite
            && self.x >= 0.0
            && self.y >= 0.0
            && self.x + self.w <= 1.0
            && self.y + self.h <= 1.0
            && self.w >= min_w - SIZE_SLACK
            && self.h >= min_h - SIZE_SLACK
    }

    /// Pixel rectangle covered by the window, rounded and kept inside the image.
    pub fn to_pixel_rect(&self, dims: ImageDims) -> PixelRect {
        let (iw, ih) = (dims.width.max(1), dims.height.max(1));
        let round = |v: f64| libm::round(v).max(0.0) as u32;
        let left = round(self.x * iw as f64).min(iw - 1);
        let top = round(self.y * ih as f64).min(ih - 1);
        let width = round(self.w * iw as f64).max(1).min(iw - left);
        let height = round(self.h * ih as f64).max(1).min(ih - top);
        PixelRect { left, top, width, height }
    }

    /// Pixel-space width over height.
    pub fn aspect_ratio(&self, dims: ImageDims) -> f64 {
        (self.w * dims.width as f64) / (self.h * dims.height as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionGroup {
    Scaling,
    Translation,
    AspectRatio,
    Termination,
}

/// The fourteen window transformations.
///
/// Scaling shrinks the window while one corner (or the center) stays put;
/// `ShrinkFromTopLeft` moves the left and top edges inward and keeps the
/// bottom-right corner anchored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Action {
    ShrinkFromTopLeft = 0,
    ShrinkFromTopRight = 1,
    ShrinkFromBottomLeft = 2,
    ShrinkFromBottomRight = 3,
    ShrinkCentered = 4,
    MoveLeft = 5,
    MoveRight = 6,
    MoveUp = 7,
    MoveDown = 8,
    Widen = 9,
    Narrow = 10,
    Heighten = 11,
    Shorten = 12,
    Terminate = 13,
}

impl Action {
    pub const ALL: [Action; NUM_ACTIONS] = [
        Action::ShrinkFromTopLeft,
        Action::ShrinkFromTopRight,
        Action::ShrinkFromBottomLeft,
        Action::ShrinkFromBottomRight,
        Action::ShrinkCentered,
        Action::MoveLeft,
        Action::MoveRight,
        Action::MoveUp,
        Action::MoveDown,
        Action::Widen,
        Action::Narrow,
        Action::Heighten,
        Action::Shorten,
        Action::Terminate,
    ];

    pub fn id(self) -> usize {
        self as usize
    }

    pub fn from_id(id: usize) -> Option<Action> {
        Self::ALL.get(id).copied()
    }

    pub fn group(self) -> ActionGroup {
        match self.id() {
            0..=4 => ActionGroup::Scaling,
            5..=8 => ActionGroup::Translation,
            9..=12 => ActionGroup::AspectRatio,
            _ => ActionGroup::Termination,
        }
    }

    pub fn is_termination(self) -> bool {
        self == Action::Terminate
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::ShrinkFromTopLeft => "shrink-top-left",
            Action::ShrinkFromTopRight => "shrink-top-right",
            Action::ShrinkFromBottomLeft => "shrink-bottom-left",
            Action::ShrinkFromBottomRight => "shrink-bottom-right",
            Action::ShrinkCentered => "shrink-centered",
            Action::MoveLeft => "move-left",
            Action::MoveRight => "move-right",
            Action::MoveUp => "move-up",
            Action::MoveDown => "move-down",
            Action::Widen => "widen",
            Action::Narrow => "narrow",
            Action::Heighten => "heighten",
            Action::Shorten => "shorten",
            Action::Terminate => "terminate",
        }
    }

    /// Edge displacements `(left, top, right, bottom)` in units of the step.
    fn edge_deltas(self) -> (f64, f64, f64, f64) {
        match self {
            Action::ShrinkFromTopLeft => (1.0, 1.0, 0.0, 0.0),
            Action::ShrinkFromTopRight => (0.0, 1.0, -1.0, 0.0),
            Action::ShrinkFromBottomLeft => (1.0, 0.0, 0.0, -1.0),
            Action::ShrinkFromBottomRight => (0.0, 0.0, -1.0, -1.0),
            Action::ShrinkCentered => (0.5, 0.5, -0.5, -0.5),
            Action::Widen => (-0.5, 0.0, 0.5, 0.0),
            Action::Narrow => (0.5, 0.0, -0.5, 0.0),
            Action::Heighten => (0.0, -0.5, 0.0, 0.5),
            Action::Shorten => (0.0, 0.5, 0.0, -0.5),
            Action::MoveLeft
            | Action::MoveRight
            | Action::MoveUp
            | Action::MoveDown
            | Action::Terminate => (0.0, 0.0, 0.0, 0.0),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// FNV-1a over the canonical action table (ids, names, edge deltas, step).
///
/// Checkpoints record this so a binary with a different table refuses them.
pub fn action_table_hash() -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET;
    let mut feed = |bytes: &[u8]| {
        for &b in bytes {
            hash ^= b as u64;
            hash = hash.wrapping_mul(PRIME);
        }
    };
    for action in Action::ALL {
        feed(&[action.id() as u8]);
        feed(action.name().as_bytes());
        let (l, t, r, b) = action.edge_deltas();
        for v in [l, t, r, b] {
            feed(&v.to_le_bytes());
        }
    }
    feed(&STEP.to_le_bytes());
    feed(&MIN_SIZE.to_le_bytes());
    hash
}

/// Geometry and episode-length limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvConfig {
    pub step: f64,
    pub min_width: f64,
    pub min_height: f64,
    pub max_steps: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self { step: STEP, min_width: MIN_SIZE, min_height: MIN_SIZE, max_steps: EPISODE_CAP }
    }
}

impl EnvConfig {
    /// Applies a non-terminating action, then clips to the unit square.
    ///
    /// A transform whose clipped result would fall below the minimum size
    /// leaves the window unchanged.
    pub fn apply(&self, window: CropWindow, action: Action) -> Result<CropWindow> {
        if action.is_termination() {
            return Err(Error::TerminationTransform);
        }
        let s = self.step;
        let next = match action {
            Action::MoveLeft => CropWindow { x: (window.x - s).max(0.0), ..window },
            Action::MoveRight => CropWindow { x: (window.x + s).min(1.0 - window.w).max(0.0), ..window },
            Action::MoveUp => CropWindow { y: (window.y - s).max(0.0), ..window },
            Action::MoveDown => CropWindow { y: (window.y + s).min(1.0 - window.h).max(0.0), ..window },
            _ => {
                let (dl, dt, dr, db) = action.edge_deltas();
                let left = (window.x + dl * s).max(0.0);
                let top = (window.y + dt * s).max(0.0);
                let right = (window.right() + dr * s).min(1.0);
                let bottom = (window.bottom() + db * s).min(1.0);
                CropWindow { x: left, y: top, w: right - left, h: bottom - top }
            }
        };
        let next = fit_unit(next);
        if next.w < self.min_width - SIZE_SLACK || next.h < self.min_height - SIZE_SLACK {
            return Ok(window);
        }
        Ok(next)
    }
}

/// Shaves the last ulp off `w`/`h` when `x + w` rounds above 1.
fn fit_unit(mut window: CropWindow) -> CropWindow {
    while window.x + window.w > 1.0 {
        window.w = f64::from_bits(window.w.to_bits() - 1);
    }
    while window.y + window.h > 1.0 {
        window.h = f64::from_bits(window.h.to_bits() - 1);
    }
    window
}

/// Applies `action` with the default geometry and the given step.
pub fn apply_action(window: CropWindow, action: Action, step: f64) -> Result<CropWindow> {
    EnvConfig { step, ..EnvConfig::default() }.apply(window, action)
}

/// One cropping episode's progress.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeState {
    pub window: CropWindow,
    pub t: usize,
    pub terminated: bool,
    pub dims: ImageDims,
}

impl EpisodeState {
    pub fn start(dims: ImageDims) -> Self {
        Self { window: CropWindow::FULL, t: 0, terminated: false, dims }
    }

    /// Advances the episode by one action.
    pub fn step(&self, action: Action, config: &EnvConfig) -> Result<EpisodeState> {
        if self.terminated || self.t >= config.max_steps {
            return Err(Error::EpisodeTerminated);
        }
        let window = if action.is_termination() { self.window } else { config.apply(self.window, action)? };
        let t = self.t + 1;
        Ok(EpisodeState {
            window,
            t,
            terminated: action.is_termination() || t >= config.max_steps,
            dims: self.dims,
        })
    }
}

/// [`EpisodeState::step`] with default limits.
pub fn episode_step(state: &EpisodeState, action: Action) -> Result<EpisodeState> {
    state.step(action, &EnvConfig::default())
}
