//! PNG input and the on-disk layer stack format: `manifest.json` plus one
//! grayscale opacity PNG per layer.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageFormat, ImageReader, Luma};
use serde::{Deserialize, Serialize};

use crate::composite::LayerStack;
use crate::error::{Error, Result};
use crate::image::{ColorImage, ColorMode};
use crate::simplify::SimplifyParams;
use crate::solver::{AlphaStack, Background, OrderedPalette, SolveOptions};
use crate::Color;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

pub fn load_image(path: impl AsRef<Path>) -> Result<ColorImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    decode_png(&bytes)
}

/// Decodes an 8-bit RGB or RGBA PNG. RGBA pixels come back premultiplied.
/// Gamma chunks are ignored.
pub fn decode_png(bytes: &[u8]) -> Result<ColorImage> {
    let reader = ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(Error::Io)?;
    if reader.format() != Some(ImageFormat::Png) {
        return Err(Error::UnsupportedImage("not a PNG file".into()));
    }
    let img = reader.decode()?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageRgb8(buf) => ColorImage::from_rgb8(w, h, buf.as_raw()),
        DynamicImage::ImageRgba8(buf) => ColorImage::from_rgba8(w, h, buf.as_raw()),
        DynamicImage::ImageRgb16(_)
        | DynamicImage::ImageRgba16(_)
        | DynamicImage::ImageLuma16(_)
        | DynamicImage::ImageLumaA16(_) => Err(Error::UnsupportedImage(
            "16-bit per channel PNGs are not supported; use 8-bit RGB or RGBA".into(),
        )),
        other => Err(Error::UnsupportedImage(format!(
            "color type {:?} is not supported; use 8-bit RGB or RGBA",
            other.color()
        ))),
    }
}

/// Encodes an image as an 8-bit PNG (RGB, or straight-alpha RGBA).
pub fn encode_png(image: &ColorImage) -> Result<Vec<u8>> {
    let (w, h) = (image.width() as u32, image.height() as u32);
    let dynamic = match image.mode() {
        ColorMode::Rgb => DynamicImage::ImageRgb8(
            ImageBuffer::from_raw(w, h, image.to_bytes()).expect("buffer size matches"),
        ),
        ColorMode::RgbaPremultiplied => DynamicImage::ImageRgba8(
            ImageBuffer::from_raw(w, h, image.to_straight_rgba8()).expect("buffer size matches"),
        ),
    };
    let mut out = Cursor::new(Vec::new());
    dynamic.write_to(&mut out, ImageFormat::Png)?;
    Ok(out.into_inner())
}

pub fn save_png(image: &ColorImage, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_png(image)?)?;
    Ok(())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AlphaDepth {
    Eight,
    #[default]
    Sixteen,
}

impl AlphaDepth {
    pub fn bits(self) -> u8 {
        match self {
            AlphaDepth::Eight => 8,
            AlphaDepth::Sixteen => 16,
        }
    }

    fn from_bits(bits: u8) -> Result<Self> {
        match bits {
            8 => Ok(AlphaDepth::Eight),
            16 => Ok(AlphaDepth::Sixteen),
            other => Err(Error::Format(format!("unsupported alpha bit depth {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestLayer {
    pub color: Color,
    pub alpha_file: String,
    pub bit_depth: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestParams {
    pub solver: SolveOptions,
    #[serde(default)]
    pub simplify: Option<SimplifyParams>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub mode: ColorMode,
    pub background_color: Option<Color>,
    /// Bottom to top.
    pub layers: Vec<ManifestLayer>,
    pub params: ManifestParams,
    pub source_hash: String,
}

pub fn layer_file_name(index: usize) -> String {
    format!("layer_{index:03}.png")
}

pub fn manifest_for(stack: &LayerStack, depth: AlphaDepth) -> Manifest {
    let background_color = match stack.palette.background() {
        Background::Opaque(c) => Some(c),
        Background::Transparent => None,
    };
    Manifest {
        version: MANIFEST_VERSION,
        mode: stack.mode(),
        background_color,
        layers: stack
            .palette
            .layers()
            .iter()
            .enumerate()
            .map(|(i, &color)| ManifestLayer {
                color,
                alpha_file: layer_file_name(i),
                bit_depth: depth.bits(),
            })
            .collect(),
        params: ManifestParams {
            solver: stack.params.clone(),
            simplify: stack.simplify_params.clone(),
        },
        source_hash: stack.source_image_hash.clone(),
    }
}

/// Encodes one opacity plane as a grayscale PNG.
pub fn encode_alpha_png(plane: &[f64], width: usize, height: usize, depth: AlphaDepth) -> Result<Vec<u8>> {
    let (w, h) = (width as u32, height as u32);
    let dynamic = match depth {
        AlphaDepth::Sixteen => {
            let raw: Vec<u16> = plane
                .iter()
                .map(|a| (a.clamp(0.0, 1.0) * 65535.0).round() as u16)
                .collect();
            DynamicImage::ImageLuma16(
                ImageBuffer::<Luma<u16>, _>::from_raw(w, h, raw).expect("buffer size matches"),
            )
        }
        AlphaDepth::Eight => {
            let raw: Vec<u8> = plane
                .iter()
                .map(|a| (a.clamp(0.0, 1.0) * 255.0).round() as u8)
                .collect();
            DynamicImage::ImageLuma8(
                ImageBuffer::<Luma<u8>, _>::from_raw(w, h, raw).expect("buffer size matches"),
            )
        }
    };
    let mut out = Cursor::new(Vec::new());
    dynamic.write_to(&mut out, ImageFormat::Png)?;
    Ok(out.into_inner())
}

pub fn save_layerstack(stack: &LayerStack, dir: impl AsRef<Path>) -> Result<Manifest> {
    save_layerstack_with_depth(stack, dir, AlphaDepth::Sixteen)
}

pub fn save_layerstack_with_depth(
    stack: &LayerStack,
    dir: impl AsRef<Path>,
    depth: AlphaDepth,
) -> Result<Manifest> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let manifest = manifest_for(stack, depth);
    for (k, layer) in manifest.layers.iter().enumerate() {
        let png = encode_alpha_png(&stack.alphas.plane(k), stack.width(), stack.height(), depth)?;
        fs::write(dir.join(&layer.alpha_file), png)?;
    }
    fs::write(
        dir.join(MANIFEST_FILE),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(manifest)
}

fn read_existing(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })
}

fn decode_alpha_png(bytes: &[u8], depth: AlphaDepth, name: &str) -> Result<(usize, usize, Vec<f64>)> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| Error::Format(format!("{name}: {e}")))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let plane = match (depth, img) {
        (AlphaDepth::Sixteen, DynamicImage::ImageLuma16(buf)) => {
            buf.into_raw().into_iter().map(|v| v as f64 / 65535.0).collect()
        }
        (AlphaDepth::Eight, DynamicImage::ImageLuma8(buf)) => {
            buf.into_raw().into_iter().map(|v| v as f64 / 255.0).collect()
        }
        (_, other) => {
            return Err(Error::Format(format!(
                "{name}: expected {}-bit grayscale, found {:?}",
                depth.bits(),
                other.color()
            )))
        }
    };
    Ok((w, h, plane))
}

pub fn load_layerstack(dir: impl AsRef<Path>) -> Result<LayerStack> {
    let dir = dir.as_ref();
    let manifest: Manifest = serde_json::from_slice(&read_existing(&dir.join(MANIFEST_FILE))?)
        .map_err(|e| Error::Format(format!("{MANIFEST_FILE}: {e}")))?;
    if manifest.version != MANIFEST_VERSION {
        return Err(Error::Format(format!(
            "unsupported manifest version {}",
            manifest.version
        )));
    }
    let background = match (manifest.mode, manifest.background_color) {
        (ColorMode::Rgb, Some(c)) => Background::Opaque(c),
        (ColorMode::RgbaPremultiplied, None) => Background::Transparent,
        (ColorMode::Rgb, None) => {
            return Err(Error::Format("rgb stack requires a background_color".into()))
        }
        (ColorMode::RgbaPremultiplied, Some(_)) => {
            return Err(Error::Format(
                "rgba-premultiplied stack must have a null background_color".into(),
            ))
        }
    };
    let palette = OrderedPalette::new(
        background,
        manifest.layers.iter().map(|l| l.color).collect(),
    )?;

    let mut dims: Option<(usize, usize)> = None;
    let mut planes = Vec::with_capacity(manifest.layers.len());
    for layer in &manifest.layers {
        let depth = AlphaDepth::from_bits(layer.bit_depth)?;
        let path = dir.join(&layer.alpha_file);
        let (w, h, plane) = decode_alpha_png(&read_existing(&path)?, depth, &layer.alpha_file)?;
        match dims {
            None => dims = Some((w, h)),
            Some(d) if d != (w, h) => {
                return Err(Error::DimensionMismatch(format!(
                    "{} is {w}x{h}, expected {}x{}",
                    layer.alpha_file, d.0, d.1
                )))
            }
            _ => {}
        }
        planes.push(plane);
    }
    let (w, h) = dims.expect("palette has at least one layer");
    let alphas = AlphaStack::from_planes(w, h, &planes)?;
    Ok(LayerStack::new(palette, alphas, manifest.source_hash, manifest.params.solver)?
        .with_simplify_params(manifest.params.simplify))
}
