use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DEFAULT_SURFACE_SAMPLES;

/// Knobs of hull simplification. Defaults follow the most common settings
/// used on gallery paintings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimplifyParams {
    /// Maximum point-to-plane distance for a RANSAC inlier.
    pub ransac_distance_threshold: f64,
    /// Plane fitting stops once fewer than this fraction of the surface
    /// samples remain unexplained.
    pub termination_fraction: f64,
    /// Count-weighted fraction of pixels each plane must keep inside.
    pub inside_fraction: f64,
    /// Mean-shift bandwidth for merging vertices; 0 disables merging.
    pub meanshift_bandwidth: f64,
    /// Candidate planes tried per RANSAC round.
    pub ransac_iterations: usize,
    /// Points sampled on the exact hull surface.
    pub surface_samples: usize,
    pub seed: u64,
}

impl Default for SimplifyParams {
    fn default() -> Self {
        Self {
            ransac_distance_threshold: 3.0,
            termination_fraction: 0.05,
            inside_fraction: 0.99,
            meanshift_bandwidth: 40.0,
            ransac_iterations: 500,
            surface_samples: DEFAULT_SURFACE_SAMPLES,
            seed: 0,
        }
    }
}

impl SimplifyParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.ransac_distance_threshold > 0.0) || !self.ransac_distance_threshold.is_finite() {
            return bad(format!(
                "ransac_distance_threshold must be positive, got {}",
                self.ransac_distance_threshold
            ));
        }
        if !(self.termination_fraction > 0.0 && self.termination_fraction < 1.0) {
            return bad(format!(
                "termination_fraction must lie in (0, 1), got {}",
                self.termination_fraction
            ));
        }
        if !(self.inside_fraction > 0.0 && self.inside_fraction <= 1.0) {
            return bad(format!(
                "inside_fraction must lie in (0, 1], got {}",
                self.inside_fraction
            ));
        }
        if !(self.meanshift_bandwidth >= 0.0) || !self.meanshift_bandwidth.is_finite() {
            return bad(format!(
                "meanshift_bandwidth must be nonnegative, got {}",
                self.meanshift_bandwidth
            ));
        }
        if self.ransac_iterations == 0 {
            return bad("ransac_iterations must be positive".into());
        }
        if self.surface_samples < 3 {
            return bad("surface_samples must be at least 3".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SimplifyParams::default().validate().unwrap();
    }

    #[test]
    fn rejects_out_of_range() {
        let cases = [
            SimplifyParams {
                inside_fraction: 0.0,
                ..Default::default()
            },
            SimplifyParams {
                termination_fraction: 1.0,
                ..Default::default()
            },
            SimplifyParams {
                ransac_distance_threshold: 0.0,
                ..Default::default()
            },
            SimplifyParams {
                meanshift_bandwidth: -1.0,
                ..Default::default()
            },
        ];
        for p in cases {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }

    #[test]
    fn missing_json_fields_take_defaults() {
        let p: SimplifyParams = serde_json::from_str(r#"{"inside_fraction": 0.95}"#).unwrap();
        assert_eq!(p.inside_fraction, 0.95);
        assert_eq!(p.ransac_distance_threshold, 3.0);
    }
}
