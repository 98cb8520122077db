//! Per-pixel layer opacities for an ordered palette.
//!
//! Opacities minimize
//! `E_polynomial + w_opaque·E_opaque + w_spatial·E_spatial` over the unit
//! box with a projected limited-memory BFGS method, solved coarse to fine
//! on a factor-of-two image pyramid. Palettes of up to three layers also
//! have an exact per-pixel solution ([`direct_solve_pixel`]).

mod direct;
mod energy;
pub mod lbfgsb;
mod palette;
mod stack;

use serde::{Deserialize, Serialize};

pub use direct::direct_solve_pixel;
pub use energy::{
    composite_from_alphas, energy_opaque, energy_polynomial, energy_spatial,
    total_energy_and_gradient,
};
pub use palette::{validate_permutation, Background, OrderedPalette};
pub use stack::{AlphaStack, StackShape};

use crate::error::{Error, Result};
use crate::image::ColorImage;
use lbfgsb::{BoxLbfgs, StopReason};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub w_opaque: f64,
    pub w_spatial: f64,
    /// Smallest dimension allowed for a pyramid level.
    pub pyramid_min_dim: usize,
    /// Starting opacity at the coarsest level.
    pub init_alpha: f64,
    pub max_iterations_per_level: usize,
    /// Iteration cap for the finest level; defaults to the per-level cap.
    pub max_iterations_final: Option<usize>,
    pub gradient_tolerance: f64,
    /// Relative energy decrease below which a level is considered
    /// converged.
    pub convergence: f64,
    pub lbfgs_memory: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            w_opaque: 100.0,
            w_spatial: 1000.0,
            pyramid_min_dim: 32,
            init_alpha: 0.5,
            max_iterations_per_level: 500,
            max_iterations_final: None,
            gradient_tolerance: 1e-5,
            convergence: 1e-8,
            lbfgs_memory: 10,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.w_opaque >= 0.0 && self.w_opaque.is_finite()) {
            return bad(format!("w_opaque must be nonnegative, got {}", self.w_opaque));
        }
        if !(self.w_spatial >= 0.0 && self.w_spatial.is_finite()) {
            return bad(format!("w_spatial must be nonnegative, got {}", self.w_spatial));
        }
        if !(0.0..=1.0).contains(&self.init_alpha) {
            return bad(format!("init_alpha must lie in [0, 1], got {}", self.init_alpha));
        }
        if self.pyramid_min_dim == 0 {
            return bad("pyramid_min_dim must be positive".into());
        }
        if self.lbfgs_memory == 0 {
            return bad("lbfgs_memory must be positive".into());
        }
        Ok(())
    }
}

/// Result of one pyramid level, handed to a [`ProgressSink`].
#[derive(Clone, Debug)]
pub struct LevelReport {
    /// 0 for the coarsest level.
    pub level: usize,
    pub level_count: usize,
    pub width: usize,
    pub height: usize,
    pub alphas: AlphaStack,
    pub energy: f64,
    pub iterations: usize,
}

/// Receives progress from [`solve_alphas`]. Called on the solving thread;
/// implementations should copy what they need and return quickly.
pub trait ProgressSink {
    fn level_done(&mut self, report: &LevelReport);

    /// Called after every accepted optimizer step.
    fn iteration(&mut self, _level: usize, _iteration: usize, _energy: f64) {}

    /// Polled between optimizer steps; returning true aborts the solve with
    /// [`Error::Cancelled`].
    fn is_cancelled(&self) -> bool {
        false
    }
}

/// A sink that ignores everything.
pub struct NoProgress;

impl ProgressSink for NoProgress {
    fn level_done(&mut self, _report: &LevelReport) {}
}

impl<F: FnMut(&LevelReport)> ProgressSink for F {
    fn level_done(&mut self, report: &LevelReport) {
        self(report)
    }
}

/// Image sizes from coarsest to finest: halve (rounding up) while the
/// smaller side stays at least `min_dim`.
pub fn pyramid_sizes(width: usize, height: usize, min_dim: usize) -> Vec<(usize, usize)> {
    let mut sizes = vec![(width, height)];
    let (mut w, mut h) = (width, height);
    while w.div_ceil(2).min(h.div_ceil(2)) >= min_dim && (w > 1 || h > 1) {
        w = w.div_ceil(2);
        h = h.div_ceil(2);
        sizes.push((w, h));
    }
    sizes.reverse();
    sizes
}

/// Solves for the opacities of every layer at every pixel, coarse to fine.
///
/// The coarsest level starts at `opts.init_alpha`; each finer level starts
/// from the bilinearly upsampled previous solution. `sink` sees every
/// level's result.
pub fn solve_alphas(
    image: &ColorImage,
    palette: &OrderedPalette,
    opts: &SolveOptions,
    sink: &mut dyn ProgressSink,
) -> Result<AlphaStack> {
    opts.validate()?;
    if image.mode() != palette.mode() {
        return Err(Error::DimensionMismatch(format!(
            "{:?} image with a {:?} palette",
            image.mode(),
            palette.mode()
        )));
    }
    let n = palette.layer_count();
    let colors = palette.vectors();

    let mut images = vec![image.clone()];
    for _ in 1..pyramid_sizes(image.width(), image.height(), opts.pyramid_min_dim).len() {
        let next = images.last().unwrap().downsample();
        images.push(next);
    }
    images.reverse();
    let level_count = images.len();

    let mut current: Option<AlphaStack> = None;
    for (level, img) in images.iter().enumerate() {
        let (w, h) = (img.width(), img.height());
        let start = match current.take() {
            None => AlphaStack::filled(w, h, n, opts.init_alpha),
            Some(prev) => prev.resized(w, h),
        };
        let mut x = start.into_data();
        let last = level + 1 == level_count;
        let optimizer = BoxLbfgs {
            memory: opts.lbfgs_memory,
            max_iterations: if last {
                opts.max_iterations_final.unwrap_or(opts.max_iterations_per_level)
            } else {
                opts.max_iterations_per_level
            },
            gradient_tolerance: opts.gradient_tolerance,
            relative_decrease: opts.convergence,
        };
        let mut cancelled = false;
        let outcome = optimizer.minimize(
            &mut x,
            |x, g| {
                energy::energy_and_gradient_raw(img, &colors, x, n, opts.w_opaque, opts.w_spatial, g)
            },
            |iteration, energy| {
                sink.iteration(level, iteration, energy);
                cancelled = sink.is_cancelled();
                !cancelled
            },
        );
        if cancelled {
            return Err(Error::Cancelled);
        }
        if outcome.reason == StopReason::NonFinite || !outcome.value.is_finite() {
            return Err(Error::NonFiniteEnergy { level });
        }
        let alphas = AlphaStack::from_raw_unchecked(w, h, n, x);
        sink.level_done(&LevelReport {
            level,
            level_count,
            width: w,
            height: h,
            alphas: alphas.clone(),
            energy: outcome.value,
            iterations: outcome.iterations,
        });
        current = Some(alphas);
    }
    Ok(current.expect("at least one pyramid level"))
}
