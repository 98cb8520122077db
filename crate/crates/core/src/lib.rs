//! Decomposition of digital paintings into ordered stacks of translucent,
//! single-color layers.
//!
//! The pipeline has two halves:
//!
//! 1. **Palette extraction.** Pixel colors are gathered into a [`ColorCloud`],
//!    wrapped in an exact convex hull, and the hull is simplified by fitting
//!    planes to samples of its surface, re-intersecting those planes and
//!    merging nearby vertices ([`simplify_palette`]).
//! 2. **Opacity solve.** Given a user-ordered palette, per-pixel layer
//!    opacities are found by minimizing a reconstruction penalty plus
//!    sparsity and smoothness regularizers under box constraints, coarse to
//!    fine ([`solve_alphas`]).
//!
//! The resulting [`LayerStack`] recomposites with Porter-Duff "over" and can
//! be saved to, and loaded from, a directory of PNG files plus a JSON
//! manifest.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod composite;
pub mod error;
pub mod geometry;
pub mod image;
pub mod io;
pub mod simplify;
pub mod solver;

pub use composite::{
    composite_stack, reconstruction_error, recolor, LayerStack, ReconstructionError,
};
pub use error::{Error, Result};
pub use geometry::{
    collect_pixel_colors, coverage_fraction, exact_convex_hull, sample_hull_surface, ColorCloud,
    HullResult, OrientedPlane, Polytope, SurfaceSamples,
};
pub use image::{ColorImage, ColorMode};
pub use io::{
    decode_png, encode_png, load_image, load_layerstack, save_layerstack, save_layerstack_with_depth,
    save_png, AlphaDepth, Manifest, ManifestLayer, ManifestParams,
};
pub use simplify::{
    halfspace_intersection, mean_shift_merge, position_planes, ransac_planes, remove_color,
    simplify_palette, Palette, PaletteDocument, PaletteSource, RansacOutcome,
    SimplifyDiagnostics, SimplifyParams, SimplifyResult,
};
pub use solver::{
    composite_from_alphas, direct_solve_pixel, energy_opaque, energy_polynomial, energy_spatial,
    solve_alphas, total_energy_and_gradient, AlphaStack, Background, LevelReport, NoProgress,
    OrderedPalette, ProgressSink, SolveOptions,
};

/// An 8-bit RGB color.
pub type Color = [u8; 3];
