//! Incremental (quickhull-style) 3D convex hull.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use super::{ColorCloud, OrientedPlane, Polytope, Vec3};
use crate::error::{Error, Result};

/// Outcome of a hull computation. Clouds whose colors do not span three
/// dimensions are described by the extreme points of their affine span.
#[derive(Clone, Debug, PartialEq)]
pub enum HullResult {
    Full(Polytope),
    Degenerate {
        /// 0 (single point), 1 (segment) or 2 (planar polygon).
        dimension: usize,
        extreme_points: Vec<Vec3>,
    },
}

impl HullResult {
    pub fn vertices(&self) -> &[Vec3] {
        match self {
            HullResult::Full(p) => &p.vertices,
            HullResult::Degenerate { extreme_points, .. } => extreme_points,
        }
    }
}

/// Exact convex hull of the cloud's colors. Premultiplied clouds are hulled
/// in straight-color space, ignoring fully transparent pixels.
pub fn exact_convex_hull(cloud: &ColorCloud) -> Result<HullResult> {
    let (points, _) = cloud.opaque_colors();
    if points.len() < 2 {
        return Err(Error::DegenerateGeometry(format!(
            "need at least 2 distinct colors, found {}",
            points.len()
        )));
    }
    Ok(convex_hull_of_points(&points))
}

fn lex_cmp(a: &Vec3, b: &Vec3) -> Ordering {
    a.x.total_cmp(&b.x)
        .then(a.y.total_cmp(&b.y))
        .then(a.z.total_cmp(&b.z))
}

/// Index maximizing `key`, ties broken toward the lexicographically largest
/// point. Keeps the chosen point extreme when several are equally far.
fn argmax_by_key(points: &[Vec3], key: impl Fn(&Vec3) -> f64) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, p) in points.iter().enumerate() {
        let k = key(p);
        let better = match k.total_cmp(&best.1) {
            Ordering::Greater => true,
            Ordering::Equal => lex_cmp(p, &points[best.0]) == Ordering::Greater,
            Ordering::Less => false,
        };
        if better {
            best = (i, k);
        }
    }
    best
}

/// Convex hull of an arbitrary point set.
pub fn convex_hull_of_points(points: &[Vec3]) -> HullResult {
    let mut pts: Vec<Vec3> = points.to_vec();
    pts.sort_by(lex_cmp);
    pts.dedup();
    if pts.is_empty() {
        return HullResult::Degenerate {
            dimension: 0,
            extreme_points: vec![],
        };
    }
    let scale = pts
        .iter()
        .flat_map(|p| p.iter().map(|c| c.abs()))
        .fold(1.0f64, f64::max);
    let eps = 1e-9 * scale;

    let first = pts[0];
    let last = *pts.last().unwrap();
    if (last - first).norm() <= eps {
        return HullResult::Degenerate {
            dimension: 0,
            extreme_points: vec![first],
        };
    }
    let dir = last - first;
    let (i2, d2) = argmax_by_key(&pts, |p| dir.cross(&(p - first)).norm_squared());
    if d2.sqrt() / dir.norm() <= eps {
        return HullResult::Degenerate {
            dimension: 1,
            extreme_points: vec![first, last],
        };
    }
    let normal = dir.cross(&(pts[i2] - first));
    let (i3, d3) = argmax_by_key(&pts, |p| normal.dot(&(p - first)).abs());
    if d3 / normal.norm() <= eps {
        return HullResult::Degenerate {
            dimension: 2,
            extreme_points: planar_hull(&pts, &first, &dir, &normal, eps),
        };
    }

    let seed = [0, pts.len() - 1, i2, i3];
    let faces = quickhull(&pts, seed, eps);
    let extreme = extreme_vertices(&pts, &faces);
    let used: HashSet<usize> = faces.iter().flatten().copied().collect();
    if extreme.len() < used.len() {
        // Some hull vertices lie inside an edge or facet; hull the
        // extreme subset again so every vertex is a corner.
        let sub: Vec<Vec3> = extreme.iter().map(|&i| pts[i]).collect();
        return convex_hull_of_points(&sub);
    }
    build_polytope(&pts, &faces)
}

fn build_polytope(pts: &[Vec3], faces: &[[usize; 3]]) -> HullResult {
    let mut used: Vec<usize> = faces.iter().flatten().copied().collect();
    used.sort_unstable();
    used.dedup();
    let remap: HashMap<usize, usize> = used.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let vertices: Vec<Vec3> = used.iter().map(|&i| pts[i]).collect();
    let faces = faces
        .iter()
        .map(|f| [remap[&f[0]], remap[&f[1]], remap[&f[2]]])
        .collect();
    HullResult::Full(Polytope::from_triangles(vertices, faces))
}

/// Vertices incident to at least three distinct face planes.
fn extreme_vertices(pts: &[Vec3], faces: &[[usize; 3]]) -> Vec<usize> {
    let mut normals: HashMap<usize, Vec<Vec3>> = HashMap::new();
    for f in faces {
        let n = (pts[f[1]] - pts[f[0]])
            .cross(&(pts[f[2]] - pts[f[0]]))
            .normalize();
        for &v in f {
            let list = normals.entry(v).or_default();
            if !list.iter().any(|m| (m - n).norm() <= 1e-12) {
                list.push(n);
            }
        }
    }
    let mut out: Vec<usize> = normals
        .into_iter()
        .filter(|(_, ns)| ns.len() >= 3)
        .map(|(v, _)| v)
        .collect();
    out.sort_unstable();
    out
}

struct Face {
    v: [usize; 3],
    plane: OrientedPlane,
    outside: Vec<usize>,
    alive: bool,
}

fn make_face(pts: &[Vec3], v: [usize; 3], fallback: Option<OrientedPlane>) -> Face {
    let (a, b, c) = (pts[v[0]], pts[v[1]], pts[v[2]]);
    let plane = OrientedPlane::through(&a, (b - a).cross(&(c - a)))
        .or(fallback)
        .expect("hull face with zero area and no fallback plane");
    Face {
        v,
        plane,
        outside: Vec::new(),
        alive: true,
    }
}

fn quickhull(pts: &[Vec3], seed: [usize; 4], eps: f64) -> Vec<[usize; 3]> {
    let mut faces: Vec<Face> = Vec::new();
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();

    // orient every tetrahedron face away from the opposite corner
    for skip in 0..4 {
        let tri: Vec<usize> = (0..4).filter(|&k| k != skip).map(|k| seed[k]).collect();
        let mut v = [tri[0], tri[1], tri[2]];
        let f = make_face(pts, v, None);
        if f.plane.signed_distance(&pts[seed[skip]]) > 0.0 {
            v.swap(1, 2);
        }
        faces.push(make_face(pts, v, None));
    }
    for (fi, f) in faces.iter().enumerate() {
        for k in 0..3 {
            edges.insert((f.v[k], f.v[(k + 1) % 3]), fi);
        }
    }

    for (i, p) in pts.iter().enumerate() {
        if seed.contains(&i) {
            continue;
        }
        if let Some(f) = faces.iter_mut().find(|f| f.plane.signed_distance(p) > eps) {
            f.outside.push(i);
        }
    }

    let mut pending: Vec<usize> = (0..faces.len())
        .filter(|&f| !faces[f].outside.is_empty())
        .collect();
    while let Some(start) = pending.pop() {
        if !faces[start].alive || faces[start].outside.is_empty() {
            continue;
        }
        let eye = {
            let f = &faces[start];
            let plane = f.plane;
            let mut best = f.outside[0];
            for &i in &f.outside[1..] {
                let (di, db) = (
                    plane.signed_distance(&pts[i]),
                    plane.signed_distance(&pts[best]),
                );
                if di > db || (di == db && lex_cmp(&pts[i], &pts[best]) == Ordering::Greater) {
                    best = i;
                }
            }
            best
        };
        let eye_pt = pts[eye];

        // flood the faces visible from the eye
        let mut visible = vec![start];
        let mut is_visible: HashSet<usize> = HashSet::from([start]);
        let mut cursor = 0;
        while cursor < visible.len() {
            let f = visible[cursor];
            cursor += 1;
            let v = faces[f].v;
            for k in 0..3 {
                let twin = edges[&(v[(k + 1) % 3], v[k])];
                if !is_visible.contains(&twin) && faces[twin].plane.signed_distance(&eye_pt) > eps
                {
                    is_visible.insert(twin);
                    visible.push(twin);
                }
            }
        }

        let mut horizon: Vec<(usize, usize, OrientedPlane)> = Vec::new();
        let mut orphans: Vec<usize> = Vec::new();
        for &f in &visible {
            let v = faces[f].v;
            for k in 0..3 {
                let (a, b) = (v[k], v[(k + 1) % 3]);
                if !is_visible.contains(&edges[&(b, a)]) {
                    horizon.push((a, b, faces[f].plane));
                }
            }
            orphans.append(&mut faces[f].outside);
            faces[f].alive = false;
        }
        for &f in &visible {
            let v = faces[f].v;
            for k in 0..3 {
                edges.remove(&(v[k], v[(k + 1) % 3]));
            }
        }

        let first_new = faces.len();
        for (a, b, old_plane) in horizon {
            let fi = faces.len();
            faces.push(make_face(pts, [a, b, eye], Some(old_plane)));
            edges.insert((a, b), fi);
            edges.insert((b, eye), fi);
            edges.insert((eye, a), fi);
        }
        for i in orphans {
            if i == eye {
                continue;
            }
            let p = pts[i];
            if let Some(f) = faces[first_new..]
                .iter_mut()
                .find(|f| f.plane.signed_distance(&p) > eps)
            {
                f.outside.push(i);
            }
        }
        pending.extend((first_new..faces.len()).filter(|&f| !faces[f].outside.is_empty()));
    }

    faces.into_iter().filter(|f| f.alive).map(|f| f.v).collect()
}

/// Convex polygon (in 3D coordinates) of coplanar points, counterclockwise
/// about `normal`, without collinear boundary points.
fn planar_hull(pts: &[Vec3], origin: &Vec3, dir: &Vec3, normal: &Vec3, eps: f64) -> Vec<Vec3> {
    let u = dir.normalize();
    let w = normal.normalize().cross(&u);
    let mut proj: Vec<(f64, f64, usize)> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let d = p - origin;
            (d.dot(&u), d.dot(&w), i)
        })
        .collect();
    proj.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let cross = |o: &(f64, f64, usize), a: &(f64, f64, usize), b: &(f64, f64, usize)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let tol = eps * eps.max(1.0);
    let mut hull: Vec<(f64, f64, usize)> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64, usize)>> = if pass == 0 {
            Box::new(proj.iter())
        } else {
            Box::new(proj.iter().rev())
        };
        for p in iter {
            while hull.len() >= start + 2
                && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= tol
            {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    hull.into_iter().map(|(_, _, i)| pts[i]).collect()
}
