use serde::{Deserialize, Serialize};

use super::{SimplifyDiagnostics, SimplifyParams};
use crate::error::{Error, Result};
use crate::Color;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PaletteSource {
    SimplifiedHull,
    UserEdited,
}

/// Paint colors extracted from an image. Index 0 is the background.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Palette {
    colors: Vec<Color>,
    source: PaletteSource,
}

impl Palette {
    pub fn new(colors: Vec<Color>, source: PaletteSource) -> Result<Self> {
        if colors.len() < 2 {
            return Err(Error::PaletteTooSmall);
        }
        Ok(Self { colors, source })
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn background_index(&self) -> usize {
        0
    }

    pub fn source(&self) -> PaletteSource {
        self.source
    }
}

/// Removes one non-background color.
pub fn remove_color(palette: &Palette, index: usize) -> Result<Palette> {
    if index >= palette.len() {
        return Err(Error::IndexOutOfRange {
            index,
            len: palette.len(),
        });
    }
    if index == palette.background_index() {
        return Err(Error::BackgroundRemoval);
    }
    let mut colors = palette.colors.clone();
    colors.remove(index);
    Palette::new(colors, PaletteSource::UserEdited)
}

/// On-disk / over-the-wire palette document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaletteDocument {
    pub colors: Vec<Color>,
    pub background_index: usize,
    pub source: PaletteSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<SimplifyParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<SimplifyDiagnostics>,
}

impl PaletteDocument {
    pub fn new(
        palette: &Palette,
        params: Option<SimplifyParams>,
        diagnostics: Option<SimplifyDiagnostics>,
    ) -> Self {
        Self {
            colors: palette.colors.clone(),
            background_index: palette.background_index(),
            source: palette.source,
            params,
            diagnostics,
        }
    }

    pub fn palette(&self) -> Result<Palette> {
        if self.background_index != 0 {
            return Err(Error::Format(format!(
                "background_index must be 0, got {}",
                self.background_index
            )));
        }
        Palette::new(self.colors.clone(), self.source)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn five() -> Palette {
        Palette::new(
            vec![[255, 255, 255], [200, 0, 0], [0, 200, 0], [0, 0, 200], [20, 20, 20]],
            PaletteSource::SimplifiedHull,
        )
        .unwrap()
    }

    #[test]
    fn remove_middle_color() {
        let p = remove_color(&five(), 3).unwrap();
        assert_eq!(p.len(), 4);
        assert!(!p.colors().contains(&[0, 0, 200]));
        assert_eq!(p.source(), PaletteSource::UserEdited);
    }

    #[test]
    fn background_is_not_removable() {
        assert!(matches!(
            remove_color(&five(), 0),
            Err(Error::BackgroundRemoval)
        ));
    }

    #[test]
    fn keeps_two_colors() {
        let mut p = five();
        while p.len() > 2 {
            p = remove_color(&p, 1).unwrap();
        }
        assert!(matches!(remove_color(&p, 1), Err(Error::PaletteTooSmall)));
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(
            remove_color(&five(), 5),
            Err(Error::IndexOutOfRange { index: 5, len: 5 })
        ));
    }

    #[test]
    fn document_json_shape() {
        let doc = PaletteDocument::new(&five(), None, None);
        let json = serde_json::to_value(&doc).unwrap();
        assert_eq!(json["colors"][1], serde_json::json!([200, 0, 0]));
        assert_eq!(json["background_index"], 0);
        assert_eq!(json["source"], "simplified-hull");
        let back: PaletteDocument = serde_json::from_value(json).unwrap();
        assert_eq!(back.palette().unwrap(), five());
    }
}
