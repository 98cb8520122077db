use nalgebra::{Matrix3, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SimplifyParams;
use crate::error::{Error, Result};
use crate::geometry::{centroid, OrientedPlane, SurfaceSamples, Vec3};

const LOCAL_ITERATIONS: usize = 100;

/// Planes found by iterative RANSAC.
#[derive(Clone, Debug, PartialEq)]
pub struct RansacOutcome {
    pub planes: Vec<OrientedPlane>,
    /// Inlier count of each plane, in discovery order.
    pub inlier_counts: Vec<usize>,
    /// Samples left unexplained when fitting stopped.
    pub remaining: usize,
    /// True when a round found no plane with at least 3 inliers before the
    /// termination fraction was reached.
    pub stopped_early: bool,
}

/// Least-squares plane through `points`: centroid plus the direction of
/// least variance.
pub(crate) fn fit_plane(points: &[Vec3]) -> Option<OrientedPlane> {
    if points.len() < 3 {
        return None;
    }
    let c = centroid(points);
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p - c;
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let (k, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    OrientedPlane::through(&c, eig.eigenvectors.column(k).into_owned())
}

fn inliers(plane: &OrientedPlane, points: &[Vec3], remaining: &[usize], threshold: f64) -> Vec<usize> {
    remaining
        .iter()
        .copied()
        .filter(|&i| plane.signed_distance(&points[i]).abs() <= threshold)
        .collect()
}

/// Repeatedly fits the plane with the most inliers among
/// `ransac_iterations` random 3-point candidates, refines it by least
/// squares and removes its inliers, until fewer than
/// `termination_fraction` of the samples remain. Planes are oriented away
/// from the centroid of all samples.
pub fn ransac_planes(samples: &SurfaceSamples, params: &SimplifyParams) -> Result<RansacOutcome> {
    params.validate()?;
    let points = &samples.points;
    if points.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "RANSAC needs at least 3 samples, got {}",
            points.len()
        )));
    }
    let center = centroid(points);
    let threshold = params.ransac_distance_threshold;
    let stop_below = params.termination_fraction * points.len() as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(1);
    let mut remaining: Vec<usize> = (0..points.len()).collect();
    let mut planes = Vec::new();
    let mut inlier_counts = Vec::new();
    let mut stopped_early = false;

    while remaining.len() as f64 >= stop_below {
        if remaining.len() < 3 {
            stopped_early = true;
            break;
        }
        let mut best: Option<(OrientedPlane, usize)> = None;
        for _ in 0..params.ransac_iterations {
            let n = remaining.len();
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            let mut c = rng.random_range(0..n - 2);
            for taken in [a.min(b), a.max(b)] {
                if c >= taken {
                    c += 1;
                }
            }
            let (pa, pb, pc) = (
                points[remaining[a]],
                points[remaining[b]],
                points[remaining[c]],
            );
            let Some(plane) = OrientedPlane::through(&pa, (pb - pa).cross(&(pc - pa))) else {
                continue;
            };
            let count = remaining
                .iter()
                .filter(|&&i| plane.signed_distance(&points[i]).abs() <= threshold)
                .count();
            if best.is_none_or(|(_, k)| count > k) {
                best = Some((plane, count));
            }
        }
        let Some((plane, _)) = best.filter(|&(_, k)| k >= 3) else {
            stopped_early = true;
            break;
        };

        // Local optimization: the inlier count is flat for planes tilted
        // within the distance threshold (samples of a neighboring face near a
        // shared edge also count), so among the winner, planes re-sampled
        // from its inliers and a least-squares refit, keep the one with the
        // lowest truncated squared residual.
        let cost = |pl: &OrientedPlane| -> f64 {
            remaining
                .iter()
                .map(|&i| pl.signed_distance(&points[i]).powi(2).min(threshold * threshold))
                .sum()
        };
        let winners = inliers(&plane, points, &remaining, threshold);
        let mut chosen = plane;
        let mut chosen_cost = cost(&plane);
        for _ in 0..LOCAL_ITERATIONS.min(params.ransac_iterations) {
            let pick: [Vec3; 3] =
                std::array::from_fn(|_| points[winners[rng.random_range(0..winners.len())]]);
            let Some(candidate) =
                OrientedPlane::through(&pick[0], (pick[1] - pick[0]).cross(&(pick[2] - pick[0])))
            else {
                continue;
            };
            let c = cost(&candidate);
            if c < chosen_cost {
                chosen = candidate;
                chosen_cost = c;
            }
        }
        let tight: Vec<Vec3> = remaining
            .iter()
            .map(|&i| points[i])
            .filter(|p| chosen.signed_distance(p).abs() <= threshold / 2.0)
            .collect();
        if let Some(refit) = fit_plane(&tight) {
            if cost(&refit) < chosen_cost {
                chosen = refit;
            }
        }
        let members = inliers(&chosen, points, &remaining, threshold);
        if chosen.signed_distance(&center) > 0.0 {
            chosen = chosen.flipped();
        }

        let drop: std::collections::HashSet<usize> = members.iter().copied().collect();
        remaining.retain(|i| !drop.contains(i));
        inlier_counts.push(members.len());
        planes.push(chosen);
    }

    Ok(RansacOutcome {
        planes,
        inlier_counts,
        remaining: remaining.len(),
        stopped_early,
    })
}
