//! Hull simplification: turns the exact hull of a painting's colors into a
//! handful of paint colors.
//!
//! The steps are surface sampling, iterative RANSAC plane fitting,
//! quantile positioning of each plane against the pixels, half-space
//! intersection and mean-shift merging of the resulting vertices.

mod halfspace;
mod meanshift;
mod palette;
mod params;
mod ransac;

use serde::{Deserialize, Serialize};

pub use halfspace::{clamp_to_rgb_cube, halfspace_intersection, position_planes};
pub use meanshift::mean_shift_merge;
pub use palette::{remove_color, Palette, PaletteDocument, PaletteSource};
pub use params::SimplifyParams;
pub use ransac::{ransac_planes, RansacOutcome};

use crate::error::{Error, Result};
use crate::geometry::{
    convex_hull_of_points, coverage_fraction, exact_convex_hull, sample_hull_surface, ColorCloud,
    HullResult, Polytope, Vec3,
};
use crate::image::quantize;
use crate::Color;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimplifyDiagnostics {
    pub exact_vertex_count: usize,
    pub plane_count: usize,
    pub ransac_stopped_early: bool,
    pub vertex_count_before_merge: usize,
    pub vertex_count_after_merge: usize,
    /// Coverage of the simplified hull with slack equal to the RANSAC
    /// distance threshold.
    pub coverage_fraction: f64,
    /// Set when the colors do not span three dimensions and the palette is
    /// the extreme points of their span.
    pub degenerate_dimension: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplifyResult {
    pub palette: Palette,
    /// The simplified hull before vertex merging; `None` for degenerate
    /// clouds.
    pub polytope: Option<Polytope>,
    pub diagnostics: SimplifyDiagnostics,
}

fn to_color(v: &Vec3) -> Color {
    [quantize(v.x), quantize(v.y), quantize(v.z)]
}

/// Puts the vertex closest to the most frequent pixel color first (the
/// default background) and the rest in lexicographic order.
fn order_colors(mut colors: Vec<Color>, cloud: &ColorCloud) -> Vec<Color> {
    colors.sort_unstable();
    colors.dedup();
    let (points, counts) = cloud.opaque_colors();
    if let Some((dominant, _)) = points
        .iter()
        .zip(&counts)
        .max_by(|a, b| a.1.cmp(b.1))
    {
        let dist = |c: &Color| {
            (Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64) - dominant).norm_squared()
        };
        if let Some(bg) = (0..colors.len()).min_by(|&a, &b| dist(&colors[a]).total_cmp(&dist(&colors[b]))) {
            let c = colors.remove(bg);
            colors.insert(0, c);
        }
    }
    colors
}

/// Full palette extraction: exact hull → surface samples → RANSAC planes →
/// quantile positioning → half-space intersection (clamped to the RGB cube)
/// → mean-shift merge.
pub fn simplify_palette(cloud: &ColorCloud, params: &SimplifyParams) -> Result<SimplifyResult> {
    params.validate()?;
    let exact = match exact_convex_hull(cloud)? {
        HullResult::Full(p) => p,
        HullResult::Degenerate {
            dimension,
            extreme_points,
        } => {
            if dimension == 0 {
                return Err(Error::DegenerateGeometry("single color".into()));
            }
            let colors = order_colors(extreme_points.iter().map(to_color).collect(), cloud);
            let palette = Palette::new(colors, PaletteSource::SimplifiedHull)?;
            let diagnostics = SimplifyDiagnostics {
                exact_vertex_count: extreme_points.len(),
                vertex_count_before_merge: extreme_points.len(),
                vertex_count_after_merge: palette.len(),
                coverage_fraction: 1.0,
                degenerate_dimension: Some(dimension),
                ..Default::default()
            };
            return Ok(SimplifyResult {
                palette,
                polytope: None,
                diagnostics,
            });
        }
    };

    let samples = sample_hull_surface(&exact, params.surface_samples, params.seed)?;
    let ransac = ransac_planes(&samples, params)?;
    let positioned = position_planes(&ransac.planes, cloud, params.inside_fraction);
    let simplified = clamp_to_rgb_cube(&halfspace_intersection(&positioned)?)?;
    let merged = mean_shift_merge(&simplified.vertices, params.meanshift_bandwidth);
    let colors = order_colors(merged.iter().map(to_color).collect(), cloud);
    let palette = Palette::new(colors, PaletteSource::SimplifiedHull)?;

    let diagnostics = SimplifyDiagnostics {
        exact_vertex_count: exact.vertices.len(),
        plane_count: ransac.planes.len(),
        ransac_stopped_early: ransac.stopped_early,
        vertex_count_before_merge: simplified.vertices.len(),
        vertex_count_after_merge: palette.len(),
        coverage_fraction: coverage_fraction(&simplified, cloud, params.ransac_distance_threshold),
        degenerate_dimension: None,
    };
    Ok(SimplifyResult {
        palette,
        polytope: Some(simplified),
        diagnostics,
    })
}

/// Hull of the palette colors themselves, when they span three dimensions.
pub fn palette_hull(palette: &Palette) -> Option<Polytope> {
    let pts: Vec<Vec3> = palette
        .colors()
        .iter()
        .map(|c| Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64))
        .collect();
    match convex_hull_of_points(&pts) {
        HullResult::Full(p) => Some(p),
        HullResult::Degenerate { .. } => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_color_cloud_returns_those_colors() {
        let colors: [Color; 4] = [[240, 230, 220], [200, 30, 40], [30, 180, 60], [40, 50, 200]];
        let cloud = ColorCloud::from_counts(
            3,
            colors
                .iter()
                .enumerate()
                .map(|(i, c)| ([c[0], c[1], c[2], 0], 10 + i as u64 * 5)),
        )
        .unwrap();
        let out = simplify_palette(&cloud, &SimplifyParams::default()).unwrap();
        let mut got = out.palette.colors().to_vec();
        got.sort_unstable();
        let mut want = colors.to_vec();
        want.sort_unstable();
        assert_eq!(got, want);
        assert_eq!(out.diagnostics.plane_count, 4);
        // most frequent color is [40,50,200] (count 25)
        assert_eq!(out.palette.colors()[0], [40, 50, 200]);
    }

    #[test]
    fn collinear_cloud_short_circuits() {
        let cloud = ColorCloud::from_counts(
            3,
            (0..10u8).map(|i| ([i * 20, i * 10, 5, 0], 1u64)),
        )
        .unwrap();
        let out = simplify_palette(&cloud, &SimplifyParams::default()).unwrap();
        assert_eq!(out.diagnostics.degenerate_dimension, Some(1));
        assert_eq!(out.palette.len(), 2);
        assert!(out.polytope.is_none());
    }

    #[test]
    fn single_color_is_error() {
        let cloud = ColorCloud::from_counts(3, [([1, 2, 3, 0], 1u64)]).unwrap();
        assert!(simplify_palette(&cloud, &SimplifyParams::default()).is_err());
    }
}
