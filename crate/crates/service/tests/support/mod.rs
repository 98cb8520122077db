#![allow(dead_code)]

use decompose_core::{
    composite_stack, encode_png, AlphaStack, Background, Color, ColorImage, LayerStack,
    OrderedPalette, SolveOptions,
};

pub const TRUTH: [Color; 4] = [[236, 228, 210], [196, 44, 52], [38, 92, 196], [246, 196, 36]];

fn smoothstep(e0: f64, e1: f64, x: f64) -> f64 {
    let t = ((x - e0) / (e1 - e0)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Four known colors composited with smooth opacity ramps.
pub fn synthetic_image(w: usize, h: usize) -> ColorImage {
    let mut planes: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(w * h)).collect();
    for y in 0..h {
        for x in 0..w {
            let u = x as f64 / (w - 1) as f64;
            let v = y as f64 / (h - 1) as f64;
            let r = ((u - 0.75).powi(2) + (v - 0.75).powi(2)).sqrt();
            planes[0].push(smoothstep(0.15, 0.45, u));
            planes[1].push(smoothstep(0.2, 0.5, v));
            planes[2].push(smoothstep(0.3, 0.12, r));
        }
    }
    let stack = LayerStack::new(
        OrderedPalette::new(Background::Opaque(TRUTH[0]), TRUTH[1..].to_vec()).unwrap(),
        AlphaStack::from_planes(w, h, &planes).unwrap(),
        String::new(),
        SolveOptions::default(),
    )
    .unwrap();
    ColorImage::from_rgb8(w, h, &composite_stack(&stack).to_bytes()).unwrap()
}

pub fn synthetic_png(w: usize, h: usize) -> Vec<u8> {
    encode_png(&synthetic_image(w, h)).unwrap()
}

/// Palette indices matching TRUTH, bottom to top.
pub fn truth_order(colors: &[Color]) -> Vec<usize> {
    TRUTH
        .iter()
        .map(|t| {
            (0..colors.len())
                .min_by_key(|&i| {
                    (0..3)
                        .map(|c| (colors[i][c] as i32 - t[c] as i32).pow(2))
                        .sum::<i32>()
                })
                .unwrap()
        })
        .collect()
}
