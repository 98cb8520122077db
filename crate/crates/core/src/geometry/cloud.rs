use std::collections::BTreeMap;

use super::Vec3;
use crate::error::{Error, Result};
use crate::image::{quantize, ColorImage};

/// Deduplicated pixel colors with multiplicities.
///
/// Points are 8-bit RGB, or premultiplied RGBA when `channel_count` is 4.
/// They are kept in lexicographic order so downstream randomized steps are
/// reproducible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorCloud {
    points: Vec<[u8; 4]>,
    counts: Vec<u64>,
    channel_count: usize,
}

impl ColorCloud {
    /// Builds a cloud from `(point, count)` pairs, merging duplicates and
    /// dropping zero counts. For 3 channels the fourth component is ignored.
    pub fn from_counts(
        channel_count: usize,
        entries: impl IntoIterator<Item = ([u8; 4], u64)>,
    ) -> Result<Self> {
        if channel_count != 3 && channel_count != 4 {
            return Err(Error::InvalidParameter(format!(
                "channel count must be 3 or 4, got {channel_count}"
            )));
        }
        let mut map: BTreeMap<[u8; 4], u64> = BTreeMap::new();
        for (mut p, n) in entries {
            if channel_count == 3 {
                p[3] = 0;
            }
            if n > 0 {
                *map.entry(p).or_default() += n;
            }
        }
        let (points, counts) = map.into_iter().unzip();
        Ok(Self {
            points,
            counts,
            channel_count,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn channel_count(&self) -> usize {
        self.channel_count
    }

    pub fn points(&self) -> &[[u8; 4]] {
        &self.points
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Color channels of point `i` (premultiplied for 4-channel clouds).
    pub fn rgb(&self, i: usize) -> Vec3 {
        let p = self.points[i];
        Vec3::new(p[0] as f64, p[1] as f64, p[2] as f64)
    }

    /// Alpha of point `i`; 255 for 3-channel clouds.
    pub fn alpha(&self, i: usize) -> f64 {
        if self.channel_count == 4 {
            self.points[i][3] as f64
        } else {
            255.0
        }
    }

    /// Straight (opaque) colors with their counts. For premultiplied clouds
    /// the color channels are divided by alpha and fully transparent points
    /// are dropped.
    pub fn opaque_colors(&self) -> (Vec<Vec3>, Vec<u64>) {
        if self.channel_count == 3 {
            return ((0..self.len()).map(|i| self.rgb(i)).collect(), self.counts.clone());
        }
        let mut map: BTreeMap<[u8; 3], u64> = BTreeMap::new();
        for (i, &n) in self.counts.iter().enumerate() {
            let a = self.alpha(i);
            if a <= 0.0 {
                continue;
            }
            let c = self.rgb(i) * (255.0 / a);
            *map.entry([quantize(c.x), quantize(c.y), quantize(c.z)])
                .or_default() += n;
        }
        map.into_iter()
            .map(|(c, n)| (Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64), n))
            .unzip()
    }
}

/// Gathers the distinct colors of `image` with their pixel counts.
pub fn collect_pixel_colors(image: &ColorImage) -> Result<ColorCloud> {
    if image.pixel_count() == 0 {
        return Err(Error::EmptyImage);
    }
    let channels = image.channels();
    ColorCloud::from_counts(
        channels,
        image.pixels().map(|px| {
            let mut p = [0u8; 4];
            for (dst, &v) in p.iter_mut().zip(px) {
                *dst = quantize(v);
            }
            (p, 1)
        }),
    )
}
