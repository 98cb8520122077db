//! Color-space geometry: pixel color clouds, exact convex hulls, surface
//! sampling and coverage statistics.
//!
//! All coordinates are in `[0, 255]` units.

mod cloud;
mod hull;
mod sampling;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

pub use cloud::{collect_pixel_colors, ColorCloud};
pub use hull::{convex_hull_of_points, exact_convex_hull, HullResult};
pub use sampling::{sample_hull_surface, SurfaceSamples, DEFAULT_SURFACE_SAMPLES};

pub type Vec3 = Vector3<f64>;

/// A plane `normal · x = offset` with a unit normal. Points with
/// `normal · x <= offset` are inside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientedPlane {
    pub normal: Vec3,
    pub offset: f64,
}

impl OrientedPlane {
    /// Normalizes `normal` and rescales `offset` to match. Returns `None`
    /// for a zero normal.
    pub fn new(normal: Vec3, offset: f64) -> Option<Self> {
        let len = normal.norm();
        if !(len > 0.0) || !len.is_finite() {
            return None;
        }
        Some(Self {
            normal: normal / len,
            offset: offset / len,
        })
    }

    /// Plane through `point` with the given normal.
    pub fn through(point: &Vec3, normal: Vec3) -> Option<Self> {
        let len = normal.norm();
        if !(len > 0.0) || !len.is_finite() {
            return None;
        }
        let normal = normal / len;
        Some(Self {
            normal,
            offset: normal.dot(point),
        })
    }

    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }

    pub fn flipped(&self) -> Self {
        Self {
            normal: -self.normal,
            offset: -self.offset,
        }
    }

    /// Angle between the two normals, in degrees.
    pub fn angle_to(&self, other: &OrientedPlane) -> f64 {
        self.normal.dot(&other.normal).clamp(-1.0, 1.0).acos().to_degrees()
    }
}

/// A closed convex polytope with triangulated, outward-oriented faces.
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
    pub planes: Vec<OrientedPlane>,
}

impl Polytope {
    /// Builds a polytope from vertices and triangles, orienting every face
    /// so that its normal points away from the vertex centroid. Degenerate
    /// (zero-area) triangles are dropped.
    pub fn from_triangles(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Self {
        let centroid = centroid(&vertices);
        let mut kept_faces = Vec::with_capacity(faces.len());
        let mut planes = Vec::with_capacity(faces.len());
        for [a, b, c] in faces {
            let (pa, pb, pc) = (vertices[a], vertices[b], vertices[c]);
            let Some(plane) = OrientedPlane::through(&pa, (pb - pa).cross(&(pc - pa))) else {
                continue;
            };
            if plane.signed_distance(&centroid) > 0.0 {
                kept_faces.push([a, c, b]);
                planes.push(plane.flipped());
            } else {
                kept_faces.push([a, b, c]);
                planes.push(plane);
            }
        }
        Self {
            vertices,
            faces: kept_faces,
            planes,
        }
    }

    pub fn centroid(&self) -> Vec3 {
        centroid(&self.vertices)
    }

    pub fn face_area(&self, face: usize) -> f64 {
        let [a, b, c] = self.faces[face];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        0.5 * (pb - pa).cross(&(pc - pa)).norm()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// True when `p` satisfies every face half-space inflated by `slack`.
    pub fn contains(&self, p: &Vec3, slack: f64) -> bool {
        self.planes.iter().all(|pl| pl.signed_distance(p) <= slack)
    }

    /// Distinct face planes, merging coplanar triangles.
    pub fn distinct_planes(&self, angle_tol_deg: f64, offset_tol: f64) -> Vec<OrientedPlane> {
        let mut out: Vec<OrientedPlane> = Vec::new();
        for plane in &self.planes {
            let dup = out.iter().any(|q| {
                q.angle_to(plane) <= angle_tol_deg && (q.offset - plane.offset).abs() <= offset_tol
            });
            if !dup {
                out.push(*plane);
            }
        }
        out
    }

    /// Mesh view for serialization: vertices and triangle indices.
    pub fn mesh(&self) -> HullMesh {
        HullMesh {
            vertices: self.vertices.iter().map(|v| [v.x, v.y, v.z]).collect(),
            faces: self.faces.clone(),
        }
    }
}

/// Plain vertex/face arrays describing a polytope surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullMesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
}

pub(crate) fn centroid(points: &[Vec3]) -> Vec3 {
    if points.is_empty() {
        return Vec3::zeros();
    }
    points.iter().fold(Vec3::zeros(), |acc, p| acc + p) / points.len() as f64
}

/// Count-weighted fraction of the cloud lying inside every face half-space
/// of `poly` inflated by `slack` (plus a 1e-6 rounding allowance).
///
/// Four-channel (premultiplied) clouds are tested against the cone the
/// polytope spans from the transparent origin: a premultiplied color
/// `(a·c, a)` is covered when `c` would be, with the plane offsets scaled by
/// `a / 255`.
pub fn coverage_fraction(poly: &Polytope, cloud: &ColorCloud, slack: f64) -> f64 {
    let total = cloud.total_count();
    if total == 0 {
        return 0.0;
    }
    let mut covered = 0u64;
    for (i, &count) in cloud.counts().iter().enumerate() {
        let p = cloud.rgb(i);
        let scale = if cloud.channel_count() == 4 {
            cloud.alpha(i) / 255.0
        } else {
            1.0
        };
        let inside = poly
            .planes
            .iter()
            .all(|pl| pl.normal.dot(&p) - pl.offset * scale <= slack + 1e-6);
        if inside {
            covered += count;
        }
    }
    covered as f64 / total as f64
}
