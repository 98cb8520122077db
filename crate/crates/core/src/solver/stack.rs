use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-layer opacity grids, stored pixel-major: the `n` opacities of a
/// pixel are contiguous.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaStack {
    width: usize,
    height: usize,
    layers: usize,
    data: Vec<f64>,
}

impl AlphaStack {
    pub fn filled(width: usize, height: usize, layers: usize, value: f64) -> Self {
        Self {
            width,
            height,
            layers,
            data: vec![value; width * height * layers],
        }
    }

    /// Builds a stack from pixel-major data; values must lie in `[0, 1]`.
    pub fn from_pixel_major(
        width: usize,
        height: usize,
        layers: usize,
        data: Vec<f64>,
    ) -> Result<Self> {
        if data.len() != width * height * layers {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height}x{layers} alpha stack needs {} values, got {}",
                width * height * layers,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!(
                "alpha value {bad} outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            layers,
            data,
        })
    }

    /// Builds a stack from one row-major grid per layer.
    pub fn from_planes(width: usize, height: usize, planes: &[Vec<f64>]) -> Result<Self> {
        let n = planes.len();
        let mut data = vec![0.0; width * height * n];
        for (k, plane) in planes.iter().enumerate() {
            if plane.len() != width * height {
                return Err(Error::DimensionMismatch(format!(
                    "alpha plane {k} has {} values, expected {}",
                    plane.len(),
                    width * height
                )));
            }
            for (p, &v) in plane.iter().enumerate() {
                data[p * n + k] = v;
            }
        }
        Self::from_pixel_major(width, height, n, data)
    }

    pub(crate) fn from_raw_unchecked(width: usize, height: usize, layers: usize, data: Vec<f64>) -> Self {
        Self {
            width,
            height,
            layers,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn layer_count(&self) -> usize {
        self.layers
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Opacities of every layer at pixel `(x, y)`.
    pub fn pixel(&self, x: usize, y: usize) -> &[f64] {
        let start = (y * self.width + x) * self.layers;
        &self.data[start..start + self.layers]
    }

    pub fn get(&self, layer: usize, x: usize, y: usize) -> f64 {
        self.data[(y * self.width + x) * self.layers + layer]
    }

    /// Row-major grid of one layer.
    pub fn plane(&self, layer: usize) -> Vec<f64> {
        self.data
            .iter()
            .skip(layer)
            .step_by(self.layers)
            .copied()
            .collect()
    }

    /// Bilinear resampling to a new size (pixel centers aligned), clamped
    /// to `[0, 1]`.
    pub fn resized(&self, width: usize, height: usize) -> AlphaStack {
        let n = self.layers;
        let mut data = vec![0.0; width * height * n];
        let coord = |dst: usize, dst_len: usize, src_len: usize| {
            let s = ((dst as f64 + 0.5) * src_len as f64 / dst_len as f64 - 0.5)
                .clamp(0.0, (src_len - 1) as f64);
            let i0 = s.floor() as usize;
            let i1 = (i0 + 1).min(src_len - 1);
            (i0, i1, s - i0 as f64)
        };
        for y in 0..height {
            let (y0, y1, fy) = coord(y, height, self.height);
            for x in 0..width {
                let (x0, x1, fx) = coord(x, width, self.width);
                for k in 0..n {
                    let top = self.get(k, x0, y0) * (1.0 - fx) + self.get(k, x1, y0) * fx;
                    let bottom = self.get(k, x0, y1) * (1.0 - fx) + self.get(k, x1, y1) * fx;
                    data[(y * width + x) * n + k] = (top * (1.0 - fy) + bottom * fy).clamp(0.0, 1.0);
                }
            }
        }
        AlphaStack {
            width,
            height,
            layers: n,
            data,
        }
    }
}

/// Serializable description of a stack's shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackShape {
    pub width: usize,
    pub height: usize,
    pub layers: usize,
}
