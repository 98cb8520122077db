use crate::geometry::Vec3;

const MAX_ITERATIONS: usize = 100;

/// Gaussian-kernel mode reached by hill climbing from `start`.
fn seek_mode(start: Vec3, data: &[Vec3], bandwidth: f64) -> Vec3 {
    let inv = 1.0 / (2.0 * bandwidth * bandwidth);
    let mut x = start;
    for _ in 0..MAX_ITERATIONS {
        let mut num = Vec3::zeros();
        let mut den = 0.0;
        for v in data {
            let w = (-(x - v).norm_squared() * inv).exp();
            num += v * w;
            den += w;
        }
        let next = num / den;
        let step = (next - x).norm();
        x = next;
        if step < bandwidth / 1000.0 {
            break;
        }
    }
    x
}

/// Merges vertices whose Gaussian mean-shift modes coincide (within
/// `bandwidth / 10`). Each merged group is replaced by its mode; vertices
/// that end up alone are returned unchanged. A zero bandwidth is the
/// identity.
pub fn mean_shift_merge(vertices: &[Vec3], bandwidth: f64) -> Vec<Vec3> {
    if !(bandwidth > 0.0) || vertices.len() < 2 {
        return vertices.to_vec();
    }
    let modes: Vec<Vec3> = vertices
        .iter()
        .map(|&v| seek_mode(v, vertices, bandwidth))
        .collect();

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, m) in modes.iter().enumerate() {
        match groups
            .iter_mut()
            .find(|g| (modes[g[0]] - m).norm() <= bandwidth / 10.0)
        {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups
        .into_iter()
        .map(|g| match g.as_slice() {
            [only] => vertices[*only],
            members => {
                members.iter().fold(Vec3::zeros(), |acc, &i| acc + modes[i]) / members.len() as f64
            }
        })
        .collect()
}
