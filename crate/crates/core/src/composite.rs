//! Porter-Duff "over" recomposition, reconstruction metrics and recoloring.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{ColorImage, ColorMode};
use crate::simplify::SimplifyParams;
use crate::solver::{AlphaStack, OrderedPalette, SolveOptions};
use crate::Color;

/// An ordered palette with one opacity grid per layer, plus provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerStack {
    pub palette: OrderedPalette,
    pub alphas: AlphaStack,
    pub source_image_hash: String,
    pub params: SolveOptions,
    pub simplify_params: Option<SimplifyParams>,
}

impl LayerStack {
    pub fn new(
        palette: OrderedPalette,
        alphas: AlphaStack,
        source_image_hash: String,
        params: SolveOptions,
    ) -> Result<Self> {
        if palette.layer_count() != alphas.layer_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} palette layers but {} alpha planes",
                palette.layer_count(),
                alphas.layer_count()
            )));
        }
        Ok(Self {
            palette,
            alphas,
            source_image_hash,
            params,
            simplify_params: None,
        })
    }

    pub fn with_simplify_params(mut self, params: Option<SimplifyParams>) -> Self {
        self.simplify_params = params;
        self
    }

    pub fn mode(&self) -> ColorMode {
        self.palette.mode()
    }

    pub fn width(&self) -> usize {
        self.alphas.width()
    }

    pub fn height(&self) -> usize {
        self.alphas.height()
    }
}

/// Composites the stack bottom to top: start from the background (opaque
/// `c_0`, or transparent) and apply `α·c_i + (1 - α)·below` for each layer.
pub fn composite_stack(stack: &LayerStack) -> ColorImage {
    let colors = stack.palette.vectors();
    let ch = stack.palette.channels();
    let (w, h) = (stack.width(), stack.height());
    let mut data = Vec::with_capacity(w * h * ch);
    for px in stack.alphas.data().chunks_exact(stack.alphas.layer_count()) {
        let mut acc = colors[0];
        for (k, &a) in px.iter().enumerate() {
            let c = &colors[k + 1];
            for i in 0..ch {
                acc[i] = a * c[i] + (1.0 - a) * acc[i];
            }
        }
        data.extend_from_slice(&acc[..ch]);
    }
    ColorImage::new(w, h, stack.mode(), data).expect("stack dimensions are nonzero")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionError {
    /// Root mean square difference over all channels and pixels.
    pub rmse: f64,
    pub max_abs: f64,
    pub per_channel_rmse: Vec<f64>,
}

pub fn reconstruction_error(
    original: &ColorImage,
    recomposed: &ColorImage,
) -> Result<ReconstructionError> {
    if (original.width(), original.height(), original.channels())
        != (recomposed.width(), recomposed.height(), recomposed.channels())
    {
        return Err(Error::DimensionMismatch(format!(
            "{}x{}x{} vs {}x{}x{}",
            original.width(),
            original.height(),
            original.channels(),
            recomposed.width(),
            recomposed.height(),
            recomposed.channels()
        )));
    }
    let ch = original.channels();
    let mut sums = vec![0.0; ch];
    let mut max_abs: f64 = 0.0;
    for (a, b) in original.pixels().zip(recomposed.pixels()) {
        for i in 0..ch {
            let d = a[i] - b[i];
            sums[i] += d * d;
            max_abs = max_abs.max(d.abs());
        }
    }
    let n = original.pixel_count() as f64;
    let per_channel_rmse: Vec<f64> = sums.iter().map(|s| (s / n).sqrt()).collect();
    let rmse = (sums.iter().sum::<f64>() / (n * ch as f64)).sqrt();
    Ok(ReconstructionError {
        rmse,
        max_abs,
        per_channel_rmse,
    })
}

/// Changes the color of stack index `layer_index` (0 = background); the
/// opacities are untouched.
pub fn recolor(stack: &LayerStack, layer_index: usize, new_color: Color) -> Result<LayerStack> {
    let palette = stack.palette.with_color(layer_index, new_color)?;
    Ok(LayerStack {
        palette,
        ..stack.clone()
    })
}
