//! Binary payloads: zipped layer stacks and base64 preview images.

use std::io::{Cursor, Write};
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use decompose_core::io::{encode_alpha_png, AlphaDepth};
use decompose_core::{
    composite_stack, encode_png, save_layerstack, Background, Error, LayerStack, Result,
};
use serde::Serialize;
use zip::write::SimpleFileOptions;

use crate::jobs::Preview;

/// Zips the regular files directly inside `dir`, sorted by name.
pub fn zip_directory(dir: &Path) -> Result<Vec<u8>> {
    let mut names: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().map(|t| t.is_file()).unwrap_or(false))
        .map(|e| e.file_name())
        .collect();
    names.sort();
    let mut zip = zip::ZipWriter::new(Cursor::new(Vec::new()));
    for name in names {
        let name = name.to_string_lossy().into_owned();
        zip.start_file(name.as_str(), SimpleFileOptions::default())
            .map_err(|e| Error::Format(e.to_string()))?;
        zip.write_all(&std::fs::read(dir.join(&name))?)?;
    }
    let out = zip.finish().map_err(|e| Error::Format(e.to_string()))?;
    Ok(out.into_inner())
}

/// The layer stack directory format, zipped.
pub fn stack_zip(stack: &LayerStack) -> Result<Vec<u8>> {
    let dir = tempfile::tempdir()?;
    save_layerstack(stack, dir.path())?;
    zip_directory(dir.path())
}

#[derive(Debug, Serialize)]
pub struct LayerThumbnail {
    pub color: [u8; 3],
    /// Base64 8-bit grayscale PNG of the layer's opacity.
    pub alpha_png: String,
}

#[derive(Debug, Serialize)]
pub struct PreviewBody {
    pub level: usize,
    pub level_count: usize,
    pub width: usize,
    pub height: usize,
    pub energy: f64,
    pub background_color: Option<[u8; 3]>,
    /// Base64 PNG of the recomposited level.
    pub composite_png: String,
    /// Bottom to top.
    pub layers: Vec<LayerThumbnail>,
}

pub fn render_preview(preview: &Preview, stack: &LayerStack) -> Result<PreviewBody> {
    let (w, h) = (stack.width(), stack.height());
    let layers = stack
        .palette
        .layers()
        .iter()
        .enumerate()
        .map(|(k, &color)| {
            Ok(LayerThumbnail {
                color,
                alpha_png: STANDARD.encode(encode_alpha_png(
                    &stack.alphas.plane(k),
                    w,
                    h,
                    AlphaDepth::Eight,
                )?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PreviewBody {
        level: preview.level,
        level_count: preview.level_count,
        width: w,
        height: h,
        energy: preview.energy,
        background_color: match stack.palette.background() {
            Background::Opaque(c) => Some(c),
            Background::Transparent => None,
        },
        composite_png: STANDARD.encode(encode_png(&composite_stack(stack))?),
        layers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Read;

    #[test]
    fn zips_files_in_name_order() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("b.txt"), b"bee").unwrap();
        std::fs::write(dir.path().join("a.txt"), b"ay").unwrap();
        std::fs::create_dir(dir.path().join("nested")).unwrap();
        let bytes = zip_directory(dir.path()).unwrap();
        let mut archive = zip::ZipArchive::new(Cursor::new(bytes)).unwrap();
        assert_eq!(archive.len(), 2);
        assert_eq!(archive.by_index(0).unwrap().name(), "a.txt");
        let mut text = String::new();
        archive.by_name("b.txt").unwrap().read_to_string(&mut text).unwrap();
        assert_eq!(text, "bee");
    }
}
