//! Floating-point color images in `[0, 255]` units.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// How pixel channels are interpreted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ColorMode {
    /// Opaque RGB over an opaque background color.
    #[serde(rename = "rgb")]
    Rgb,
    /// RGBA with color channels premultiplied by alpha; the background is
    /// transparent.
    #[serde(rename = "rgba-premultiplied")]
    RgbaPremultiplied,
}

impl ColorMode {
    pub fn channels(self) -> usize {
        match self {
            ColorMode::Rgb => 3,
            ColorMode::RgbaPremultiplied => 4,
        }
    }
}

/// Premultiplies an 8-bit channel by an 8-bit alpha, rounding half up.
pub fn premultiply(channel: u8, alpha: u8) -> u8 {
    ((channel as u32 * alpha as u32 + 127) / 255) as u8
}

/// Rounds a float channel to 8 bits, half up, after clamping to `[0, 255]`.
pub fn quantize(value: f64) -> u8 {
    (value.clamp(0.0, 255.0) + 0.5).floor() as u8
}

/// A row-major image with 3 (RGB) or 4 (premultiplied RGBA) channels per
/// pixel stored as `f64` in `[0, 255]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ColorImage {
    width: usize,
    height: usize,
    mode: ColorMode,
    data: Vec<f64>,
}

impl ColorImage {
    pub fn new(width: usize, height: usize, mode: ColorMode, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        let expected = width * height * mode.channels();
        if data.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} {mode:?} image needs {expected} samples, got {}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            mode,
            data,
        })
    }

    /// Builds an image filled with a single color.
    pub fn filled(width: usize, height: usize, mode: ColorMode, color: &[f64]) -> Result<Self> {
        assert_eq!(color.len(), mode.channels());
        let data = color
            .iter()
            .copied()
            .cycle()
            .take(width * height * mode.channels())
            .collect();
        Self::new(width, height, mode, data)
    }

    pub fn from_rgb8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        Self::new(
            width,
            height,
            ColorMode::Rgb,
            bytes.iter().map(|&b| b as f64).collect(),
        )
    }

    /// Builds a premultiplied image from straight (non-premultiplied) RGBA
    /// bytes. Premultiplication is rounded to whole 8-bit values.
    pub fn from_rgba8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        let data = bytes
            .chunks_exact(4)
            .flat_map(|px| {
                let a = px[3];
                [
                    premultiply(px[0], a) as f64,
                    premultiply(px[1], a) as f64,
                    premultiply(px[2], a) as f64,
                    a as f64,
                ]
            })
            .collect();
        Self::new(width, height, ColorMode::RgbaPremultiplied, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mode(&self) -> ColorMode {
        self.mode
    }

    pub fn channels(&self) -> usize {
        self.mode.channels()
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[f64] {
        let c = self.channels();
        let start = (y * self.width + x) * c;
        &self.data[start..start + c]
    }

    pub fn pixels(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.channels())
    }

    /// Quantizes to 8-bit samples in the image's own channel layout.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize(v)).collect()
    }

    /// Quantizes to straight (non-premultiplied) 8-bit RGBA for export.
    /// RGB images get an opaque alpha channel.
    pub fn to_straight_rgba8(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.pixel_count() * 4);
        for px in self.pixels() {
            match self.mode {
                ColorMode::Rgb => {
                    out.extend(px.iter().map(|&v| quantize(v)));
                    out.push(255);
                }
                ColorMode::RgbaPremultiplied => {
                    let a = px[3].clamp(0.0, 255.0);
                    for &v in &px[..3] {
                        out.push(if a > 0.0 { quantize(v * 255.0 / a) } else { 0 });
                    }
                    out.push(quantize(a));
                }
            }
        }
        out
    }

    /// SHA-256 over dimensions, mode and the quantized samples, as hex.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.width as u64).to_le_bytes());
        hasher.update((self.height as u64).to_le_bytes());
        hasher.update([self.channels() as u8]);
        hasher.update(self.to_bytes());
        hex::encode(hasher.finalize())
    }

    /// Halves each dimension (rounding up) by averaging 2x2 blocks; blocks
    /// clipped by the border average the pixels they contain.
    pub fn downsample(&self) -> ColorImage {
        let c = self.channels();
        let (w, h) = (self.width.div_ceil(2), self.height.div_ceil(2));
        let mut data = vec![0.0; w * h * c];
        for y in 0..h {
            for x in 0..w {
                let out = &mut data[(y * w + x) * c..(y * w + x + 1) * c];
                let mut n = 0.0;
                for sy in 2 * y..(2 * y + 2).min(self.height) {
                    for sx in 2 * x..(2 * x + 2).min(self.width) {
                        for (o, v) in out.iter_mut().zip(self.pixel(sx, sy)) {
                            *o += v;
                        }
                        n += 1.0;
                    }
                }
                out.iter_mut().for_each(|o| *o /= n);
            }
        }
        ColorImage {
            width: w,
            height: h,
            mode: self.mode,
            data,
        }
    }
}
