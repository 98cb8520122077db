use nalgebra::{DMatrix, DVector};

use super::OrderedPalette;
use crate::error::{Error, Result};

const TOLERANCE: f64 = 1e-6;

/// Exact opacities for a pixel over at most three layers.
///
/// The pixel is projected along the ray from the top color `c_n` onto the
/// simplex of `c_0 … c_{n-1}`; the fraction of the way from that
/// intersection `q` to `c_n` is `α_n`, and the procedure recurses on `q`.
/// A pixel equal to `c_n` gets `α_n = 1` and zeros below.
pub fn direct_solve_pixel(pixel: &[f64], palette: &OrderedPalette) -> Result<Vec<f64>> {
    let n = palette.layer_count();
    if n > 3 {
        return Err(Error::InvalidParameter(format!(
            "direct solve supports at most 3 layers, got {n}"
        )));
    }
    let ch = palette.channels();
    if pixel.len() != ch {
        return Err(Error::DimensionMismatch(format!(
            "pixel has {} channels, palette {ch}",
            pixel.len()
        )));
    }
    let colors: Vec<Vec<f64>> = palette.vectors().iter().map(|c| c[..ch].to_vec()).collect();
    let mut alphas = vec![0.0; n];
    let mut point = pixel.to_vec();
    for top in (1..=n).rev() {
        match project_along_top(&point, &colors[..=top])? {
            None => {
                alphas[top - 1] = 1.0;
                return Ok(alphas);
            }
            Some((alpha, q)) => {
                alphas[top - 1] = alpha;
                point = q;
            }
        }
    }
    let dist = dist(&point, &colors[0]);
    if dist > TOLERANCE {
        return Err(Error::OutsideSimplex { distance: dist });
    }
    Ok(alphas)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Writes `p - c_top = u (c_0 - c_top) + Σ_i γ_i (c_i - c_0)` for
/// `i = 1..top-1` and solves for `(u, γ)` by least squares. Then
/// `α_top = 1 - u` and `q = c_0 + Σ (γ_i / u)(c_i - c_0)`. Returns `None`
/// when `p` coincides with `c_top`.
fn project_along_top(p: &[f64], colors: &[Vec<f64>]) -> Result<Option<(f64, Vec<f64>)>> {
    let top = colors.len() - 1;
    let ch = p.len();
    let c_top = &colors[top];
    if dist(p, c_top) <= TOLERANCE {
        return Ok(None);
    }
    let mut m = DMatrix::zeros(ch, top);
    for r in 0..ch {
        m[(r, 0)] = colors[0][r] - c_top[r];
        for i in 1..top {
            m[(r, i)] = colors[i][r] - colors[0][r];
        }
    }
    let rhs = DVector::from_iterator(ch, (0..ch).map(|r| p[r] - c_top[r]));
    let svd = m.clone().svd(true, true);
    let sol = svd
        .solve(&rhs, 1e-12)
        .map_err(|_| Error::DegenerateGeometry("palette colors are not affinely independent".into()))?;
    let singular_min = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    if singular_min <= 1e-9 {
        return Err(Error::DegenerateGeometry(
            "palette colors are not affinely independent".into(),
        ));
    }
    let residual = (&m * &sol - &rhs).norm();
    if residual > TOLERANCE {
        return Err(Error::OutsideSimplex { distance: residual });
    }
    let u = sol[0];
    let alpha = 1.0 - u;
    if !(-TOLERANCE..=1.0 + TOLERANCE).contains(&alpha) || u <= 0.0 {
        return Err(Error::OutsideSimplex {
            distance: if alpha < 0.0 { -alpha } else { alpha - 1.0 },
        });
    }
    let mut q = colors[0].clone();
    for i in 1..top {
        let beta = sol[i] / u;
        for r in 0..ch {
            q[r] += beta * (colors[i][r] - colors[0][r]);
        }
    }
    Ok(Some((alpha.clamp(0.0, 1.0), q)))
}
