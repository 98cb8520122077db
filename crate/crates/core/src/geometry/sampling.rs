use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Polytope, Vec3};
use crate::error::{Error, Result};

pub const DEFAULT_SURFACE_SAMPLES: usize = 10_000;

/// Points drawn on a polytope's boundary, each tagged with its face.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceSamples {
    pub points: Vec<Vec3>,
    pub source_face: Vec<usize>,
}

impl SurfaceSamples {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Draws `n_samples` points uniformly over the surface area of `poly`:
/// faces are picked with probability proportional to area, then a point is
/// drawn uniformly inside the chosen triangle.
pub fn sample_hull_surface(poly: &Polytope, n_samples: usize, seed: u64) -> Result<SurfaceSamples> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be positive".into()));
    }
    let mut cumulative = Vec::with_capacity(poly.faces.len());
    let mut total = 0.0;
    for f in 0..poly.faces.len() {
        total += poly.face_area(f);
        cumulative.push(total);
    }
    if !(total > 0.0) {
        return Err(Error::DegenerateGeometry(
            "polytope has no surface area to sample".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n_samples);
    let mut source_face = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let target = rng.random::<f64>() * total;
        let face = cumulative
            .partition_point(|&c| c <= target)
            .min(poly.faces.len() - 1);
        let [a, b, c] = poly.faces[face];
        let (pa, pb, pc) = (poly.vertices[a], poly.vertices[b], poly.vertices[c]);
        let (mut r1, mut r2) = (rng.random::<f64>(), rng.random::<f64>());
        if r1 + r2 > 1.0 {
            r1 = 1.0 - r1;
            r2 = 1.0 - r2;
        }
        points.push(pa + (pb - pa) * r1 + (pc - pa) * r2);
        source_face.push(face);
    }
    Ok(SurfaceSamples {
        points,
        source_face,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{convex_hull_of_points, HullResult};

    /// Two disjoint squares with areas `side²` and `3·side²`.
    fn square_pair() -> Polytope {
        let s = 10.0;
        let t = s * 3f64.sqrt();
        let vertices = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(s, 0.0, 0.0),
            Vec3::new(s, s, 0.0),
            Vec3::new(0.0, s, 0.0),
            Vec3::new(0.0, 0.0, 50.0),
            Vec3::new(t, 0.0, 50.0),
            Vec3::new(t, t, 50.0),
            Vec3::new(0.0, t, 50.0),
        ];
        let faces = vec![[0, 1, 2], [0, 2, 3], [4, 5, 6], [4, 6, 7]];
        Polytope::from_triangles(vertices, faces)
    }

    #[test]
    fn counts_follow_face_area() {
        let poly = square_pair();
        let samples = sample_hull_surface(&poly, 4000, 3).unwrap();
        let small = samples.source_face.iter().filter(|&&f| f < 2).count() as f64;
        let large = 4000.0 - small;
        // expected 1000 / 3000, within 5%
        assert!((small - 1000.0).abs() <= 50.0, "small face count {small}");
        assert!((large - 3000.0).abs() <= 150.0, "large face count {large}");
        let chi2 = (small - 1000.0).powi(2) / 1000.0 + (large - 3000.0).powi(2) / 3000.0;
        // 1 degree of freedom, p = 0.001
        assert!(chi2 < 10.83, "chi-square {chi2}");
    }

    #[test]
    fn samples_lie_on_their_faces() {
        let pts: Vec<Vec3> = [
            [0.0, 0.0, 0.0],
            [255.0, 0.0, 0.0],
            [0.0, 255.0, 0.0],
            [0.0, 0.0, 255.0],
            [200.0, 200.0, 200.0],
        ]
        .iter()
        .map(|p| Vec3::from(*p))
        .collect();
        let HullResult::Full(poly) = convex_hull_of_points(&pts) else {
            panic!()
        };
        let samples = sample_hull_surface(&poly, 500, 1).unwrap();
        assert_eq!(samples.len(), 500);
        for (p, &f) in samples.points.iter().zip(&samples.source_face) {
            assert!(poly.planes[f].signed_distance(p).abs() < 1e-6);
        }
        let one = sample_hull_surface(&poly, 1, 9).unwrap();
        assert_eq!(one.len(), 1);
    }

    #[test]
    fn deterministic_for_seed() {
        let poly = square_pair();
        let a = sample_hull_surface(&poly, 100, 42).unwrap();
        let b = sample_hull_surface(&poly, 100, 42).unwrap();
        let c = sample_hull_surface(&poly, 100, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(sample_hull_surface(&square_pair(), 0, 0).is_err());
    }
}
