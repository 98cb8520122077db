use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ColorMode;
use crate::simplify::Palette;
use crate::Color;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Background {
    Opaque(Color),
    Transparent,
}

/// Layer colors in compositing order, bottom to top, above a background.
///
/// In opaque mode colors are 3-vectors and the background is `c_0`. In
/// transparent mode colors are premultiplied 4-vectors `(r, g, b, 255)` over
/// the zero vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderedPalette {
    background: Background,
    layers: Vec<Color>,
}

impl OrderedPalette {
    pub fn new(background: Background, layers: Vec<Color>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one layer above the background is required".into(),
            ));
        }
        Ok(Self { background, layers })
    }

    /// Orders `palette` by `order`, a permutation of its indices listed
    /// bottom to top. In RGB mode `order[0]` becomes the background; in
    /// premultiplied RGBA mode every color becomes a layer over a
    /// transparent background.
    pub fn from_palette(palette: &Palette, order: &[usize], mode: ColorMode) -> Result<Self> {
        validate_permutation(order, palette.len())?;
        let colors = palette.colors();
        match mode {
            ColorMode::Rgb => Self::new(
                Background::Opaque(colors[order[0]]),
                order[1..].iter().map(|&i| colors[i]).collect(),
            ),
            ColorMode::RgbaPremultiplied => Self::new(
                Background::Transparent,
                order.iter().map(|&i| colors[i]).collect(),
            ),
        }
    }

    pub fn background(&self) -> Background {
        self.background
    }

    pub fn layers(&self) -> &[Color] {
        &self.layers
    }

    /// Number of layers above the background (`n`).
    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn mode(&self) -> ColorMode {
        match self.background {
            Background::Opaque(_) => ColorMode::Rgb,
            Background::Transparent => ColorMode::RgbaPremultiplied,
        }
    }

    pub fn channels(&self) -> usize {
        self.mode().channels()
    }

    /// `c_0 … c_n` as channel vectors (unused trailing entries are zero in
    /// RGB mode).
    pub fn vectors(&self) -> Vec<[f64; 4]> {
        let lift = |c: &Color, a: f64| [c[0] as f64, c[1] as f64, c[2] as f64, a];
        let mut out = Vec::with_capacity(self.layers.len() + 1);
        match self.background {
            Background::Opaque(c) => {
                out.push(lift(&c, 0.0));
                out.extend(self.layers.iter().map(|c| lift(c, 0.0)));
            }
            Background::Transparent => {
                out.push([0.0; 4]);
                out.extend(self.layers.iter().map(|c| lift(c, 255.0)));
            }
        }
        out
    }

    /// Color of stack index `i` (0 = background). The transparent
    /// background has no color.
    pub fn color(&self, index: usize) -> Option<Color> {
        match (index, self.background) {
            (0, Background::Opaque(c)) => Some(c),
            (0, Background::Transparent) => None,
            (i, _) => self.layers.get(i - 1).copied(),
        }
    }

    /// Replaces the color at stack index `index` (0 = background).
    pub fn with_color(&self, index: usize, color: Color) -> Result<Self> {
        let mut out = self.clone();
        match (index, &mut out.background) {
            (0, Background::Opaque(c)) => *c = color,
            (0, Background::Transparent) => {
                return Err(Error::InvalidParameter(
                    "the transparent background has no color".into(),
                ))
            }
            (i, _) if i <= out.layers.len() => out.layers[i - 1] = color,
            (i, _) => {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: out.layers.len() + 1,
                })
            }
        }
        Ok(out)
    }
}

pub fn validate_permutation(order: &[usize], len: usize) -> Result<()> {
    let mut seen = vec![false; len];
    for &i in order {
        if i >= len || std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidParameter(format!(
                "order {order:?} is not a permutation of 0..{len}"
            )));
        }
    }
    if order.len() != len {
        return Err(Error::InvalidParameter(format!(
            "order {order:?} is not a permutation of 0..{len}"
        )));
    }
    Ok(())
}
