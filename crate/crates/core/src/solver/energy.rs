//! Reconstruction, sparsity and smoothness energies with analytic
//! gradients.

use rayon::prelude::*;

use super::{AlphaStack, OrderedPalette, SolveOptions};
use crate::image::ColorImage;

/// Color produced by the layer stack at one pixel, in closed form:
/// `c_n + Σ_{i=1..n} (c_{i-1} - c_i) Π_{j=i..n} (1 - α_j)`.
pub fn composite_from_alphas(alphas: &[f64], palette: &OrderedPalette) -> Vec<f64> {
    let c = palette.vectors();
    let ch = palette.channels();
    let n = alphas.len();
    assert_eq!(n, palette.layer_count(), "one alpha per layer");
    let mut out: Vec<f64> = c[n][..ch].to_vec();
    let mut transmit = 1.0;
    for i in (1..=n).rev() {
        transmit *= 1.0 - alphas[i - 1];
        for (o, k) in out.iter_mut().zip(0..ch) {
            *o += (c[i - 1][k] - c[i][k]) * transmit;
        }
    }
    out
}

/// Squared reconstruction residual of one pixel, in `[0, 255]` units.
pub fn energy_polynomial(pixel: &[f64], alphas: &[f64], palette: &OrderedPalette) -> f64 {
    composite_from_alphas(alphas, palette)
        .iter()
        .zip(pixel)
        .map(|(a, b)| (a - b).powi(2))
        .sum()
}

/// `Σ -(1 - α_i)²`: lowest when layers are either transparent or opaque
/// rather than uniformly half-transparent.
pub fn energy_opaque(alphas: &[f64]) -> f64 {
    alphas.iter().map(|a| -(1.0 - a).powi(2)).sum()
}

/// Number of 4-neighbors of `(x, y)` inside a `width × height` grid.
fn neighbor_count(x: usize, y: usize, width: usize, height: usize) -> f64 {
    ((x > 0) as usize + (x + 1 < width) as usize + (y > 0) as usize + (y + 1 < height) as usize)
        as f64
}

/// Laplacian energy of one row-major grid: the sum over pixels of
/// `(α - mean of 4-neighbors)²`, where border pixels average over the
/// neighbors they have. A 1×1 grid has no neighbors and zero energy.
pub fn energy_spatial(plane: &[f64], width: usize, height: usize) -> f64 {
    assert_eq!(plane.len(), width * height);
    let mut total = 0.0;
    for y in 0..height {
        for x in 0..width {
            let l = laplacian(|xx, yy| plane[yy * width + xx], x, y, width, height);
            total += l * l;
        }
    }
    total
}

#[inline]
fn laplacian(
    at: impl Fn(usize, usize) -> f64,
    x: usize,
    y: usize,
    width: usize,
    height: usize,
) -> f64 {
    let count = neighbor_count(x, y, width, height);
    if count == 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    if x > 0 {
        sum += at(x - 1, y);
    }
    if x + 1 < width {
        sum += at(x + 1, y);
    }
    if y > 0 {
        sum += at(x, y - 1);
    }
    if y + 1 < height {
        sum += at(x, y + 1);
    }
    at(x, y) - sum / count
}

/// Reconstruction energy and gradient of a single pixel. The gradient is
/// *added* into `grad`.
///
/// Uses the running composite `B_k = α_k c_k + (1 - α_k) B_{k-1}` and the
/// suffix transmittance `S_{k+1} = Π_{j>k} (1 - α_j)`, for which
/// `∂B_n/∂α_k = S_{k+1} (c_k - B_{k-1})`.
#[inline]
fn pixel_polynomial(
    pixel: &[f64],
    alphas: &[f64],
    colors: &[[f64; 4]],
    below: &mut [[f64; 4]],
    grad: &mut [f64],
) -> f64 {
    let n = alphas.len();
    let ch = pixel.len();
    let mut running = colors[0];
    for k in 1..=n {
        below[k - 1] = running;
        let a = alphas[k - 1];
        for c in 0..ch {
            running[c] = a * colors[k][c] + (1.0 - a) * running[c];
        }
    }
    let mut residual = [0.0; 4];
    let mut energy = 0.0;
    for c in 0..ch {
        residual[c] = running[c] - pixel[c];
        energy += residual[c] * residual[c];
    }
    let mut suffix = 1.0;
    for k in (1..=n).rev() {
        let mut dot = 0.0;
        for c in 0..ch {
            dot += residual[c] * (colors[k][c] - below[k - 1][c]);
        }
        grad[k - 1] += 2.0 * dot * suffix;
        suffix *= 1.0 - alphas[k - 1];
    }
    energy
}

/// Combined energy `E_polynomial + w_opaque E_opaque + w_spatial E_spatial`
/// over a whole image and its exact gradient (pixel-major, like
/// [`AlphaStack`]).
pub fn total_energy_and_gradient(
    image: &ColorImage,
    palette: &OrderedPalette,
    alphas: &AlphaStack,
    opts: &SolveOptions,
) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; alphas.data().len()];
    let e = energy_and_gradient_raw(
        image,
        &palette.vectors(),
        alphas.data(),
        alphas.layer_count(),
        opts.w_opaque,
        opts.w_spatial,
        &mut grad,
    );
    (e, grad)
}

/// Same as [`total_energy_and_gradient`] on raw pixel-major slices; the
/// gradient buffer is overwritten.
pub(crate) fn energy_and_gradient_raw(
    image: &ColorImage,
    colors: &[[f64; 4]],
    x: &[f64],
    n: usize,
    w_opaque: f64,
    w_spatial: f64,
    grad: &mut [f64],
) -> f64 {
    let (width, height) = (image.width(), image.height());
    let ch = image.channels();
    let row_len = width * n;
    debug_assert_eq!(x.len(), row_len * height);
    debug_assert_eq!(grad.len(), x.len());

    // reconstruction and opacity terms, row-parallel
    let row_energy: Vec<f64> = grad
        .par_chunks_mut(row_len)
        .enumerate()
        .map(|(y, g_row)| {
            let mut below = vec![[0.0; 4]; n];
            let mut e = 0.0;
            for xx in 0..width {
                let p = (y * width + xx) * n;
                let a = &x[p..p + n];
                let g = &mut g_row[xx * n..(xx + 1) * n];
                g.iter_mut().for_each(|v| *v = 0.0);
                let px_start = (y * width + xx) * ch;
                e += pixel_polynomial(
                    &image.data()[px_start..px_start + ch],
                    a,
                    colors,
                    &mut below,
                    g,
                );
                if w_opaque != 0.0 {
                    for (gk, &ak) in g.iter_mut().zip(a) {
                        e -= w_opaque * (1.0 - ak) * (1.0 - ak);
                        *gk += 2.0 * w_opaque * (1.0 - ak);
                    }
                }
            }
            e
        })
        .collect();
    let mut energy: f64 = row_energy.iter().sum();

    if w_spatial != 0.0 {
        let at = |k: usize| move |xx: usize, yy: usize| x[(yy * width + xx) * n + k];
        // Laplacian of every layer at every pixel
        let mut lap = vec![0.0; x.len()];
        lap.par_chunks_mut(row_len).enumerate().for_each(|(y, l_row)| {
            for xx in 0..width {
                for k in 0..n {
                    l_row[xx * n + k] = laplacian(at(k), xx, y, width, height);
                }
            }
        });
        let spatial: f64 = lap.iter().map(|l| l * l).sum();
        energy += w_spatial * spatial;

        // ∂/∂α(z) Σ_x L(x)² = 2 L(z) - Σ_{x ∈ N(z)} 2 L(x) / |N(x)|
        grad.par_chunks_mut(row_len).enumerate().for_each(|(y, g_row)| {
            for xx in 0..width {
                let mut neighbors = [(0usize, 0usize); 4];
                let mut m = 0;
                if xx > 0 {
                    neighbors[m] = (xx - 1, y);
                    m += 1;
                }
                if xx + 1 < width {
                    neighbors[m] = (xx + 1, y);
                    m += 1;
                }
                if y > 0 {
                    neighbors[m] = (xx, y - 1);
                    m += 1;
                }
                if y + 1 < height {
                    neighbors[m] = (xx, y + 1);
                    m += 1;
                }
                if m == 0 {
                    continue;
                }
                for k in 0..n {
                    let mut d = 2.0 * lap[(y * width + xx) * n + k];
                    for &(nx, ny) in &neighbors[..m] {
                        d -= 2.0 * lap[(ny * width + nx) * n + k]
                            / neighbor_count(nx, ny, width, height);
                    }
                    g_row[xx * n + k] += w_spatial * d;
                }
            }
        });
    }
    energy
}
