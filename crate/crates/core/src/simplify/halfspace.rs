use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::geometry::{convex_hull_of_points, ColorCloud, HullResult, OrientedPlane, Polytope, Vec3};

/// Moves each plane along its normal so that at least `inside_fraction` of
/// the count-weighted cloud satisfies `n · x <= offset`; the new offset is
/// the corresponding weighted quantile of the projections.
///
/// Premultiplied clouds are positioned against their straight colors.
pub fn position_planes(
    planes: &[OrientedPlane],
    cloud: &ColorCloud,
    inside_fraction: f64,
) -> Vec<OrientedPlane> {
    let (points, counts) = cloud.opaque_colors();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return planes.to_vec();
    }
    let target = inside_fraction.clamp(0.0, 1.0) * total as f64;
    planes
        .iter()
        .map(|plane| {
            let mut proj: Vec<(f64, u64)> = points
                .iter()
                .zip(&counts)
                .map(|(p, &n)| (plane.normal.dot(p), n))
                .collect();
            proj.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut cumulative = 0u64;
            let mut offset = proj.last().map_or(plane.offset, |p| p.0);
            for (value, n) in proj {
                cumulative += n;
                if cumulative as f64 >= target {
                    offset = value;
                    break;
                }
            }
            OrientedPlane {
                normal: plane.normal,
                offset,
            }
        })
        .collect()
}

const BOUND: f64 = 1.0e6;

/// Convex polytope `{x : n_i · x <= d_i for all i}`.
///
/// Vertices are found as intersections of plane triples that satisfy every
/// half-space. The region must be bounded and have a nonempty interior.
pub fn halfspace_intersection(planes: &[OrientedPlane]) -> Result<Polytope> {
    if planes.len() < 4 {
        return Err(Error::HalfspaceIntersection(
            "unbounded (fewer than 4 planes)",
        ));
    }
    // A far-away box turns an unbounded region into a bounded one whose
    // vertices touch the box.
    let mut all: Vec<OrientedPlane> = planes.to_vec();
    let first_box = all.len();
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            let mut n = Vec3::zeros();
            n[axis] = sign;
            all.push(OrientedPlane {
                normal: n,
                offset: BOUND,
            });
        }
    }

    let scale = planes.iter().map(|p| p.offset.abs()).fold(1.0, f64::max);
    let tol = 1e-9 * scale;
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut touches_box = false;
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            for k in j + 1..all.len() {
                let m = Matrix3::from_rows(&[
                    all[i].normal.transpose(),
                    all[j].normal.transpose(),
                    all[k].normal.transpose(),
                ]);
                if m.determinant().abs() < 1e-10 {
                    continue;
                }
                let Some(x) = m.lu().solve(&Vec3::new(all[i].offset, all[j].offset, all[k].offset))
                else {
                    continue;
                };
                let slack = tol.max(1e-9 * x.amax());
                if all.iter().all(|p| p.signed_distance(&x) <= slack) {
                    if all[first_box..].iter().any(|p| p.signed_distance(&x) > -slack) {
                        touches_box = true;
                    }
                    if !vertices.iter().any(|v| (v - x).norm() <= 1e-7 * scale) {
                        vertices.push(x);
                    }
                }
            }
        }
    }
    if vertices.is_empty() {
        return Err(Error::HalfspaceIntersection("empty"));
    }
    if touches_box {
        return Err(Error::HalfspaceIntersection("unbounded"));
    }
    match convex_hull_of_points(&vertices) {
        HullResult::Full(poly) => Ok(poly),
        HullResult::Degenerate { .. } => Err(Error::HalfspaceIntersection("flat (no interior)")),
    }
}

/// Clamps vertices into the RGB cube, rebuilding the hull when anything
/// moved.
pub fn clamp_to_rgb_cube(poly: &Polytope) -> Result<Polytope> {
    let inside = |v: &Vec3| v.iter().all(|c| (0.0..=255.0).contains(c));
    if poly.vertices.iter().all(inside) {
        return Ok(poly.clone());
    }
    let clamped: Vec<Vec3> = poly
        .vertices
        .iter()
        .map(|v| v.map(|c| c.clamp(0.0, 255.0)))
        .collect();
    match convex_hull_of_points(&clamped) {
        HullResult::Full(p) => Ok(p),
        HullResult::Degenerate { .. } => Err(Error::DegenerateGeometry(
            "simplified hull collapsed after clamping to the RGB cube".into(),
        )),
    }
}
