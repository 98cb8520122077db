//! Synthetic images with known layer decompositions.
#![allow(dead_code)]

use decompose_core::{
    composite_stack, AlphaStack, Background, Color, ColorImage, LayerStack, OrderedPalette,
    Palette, SolveOptions,
};

/// Background first, then layers bottom to top.
pub const TRUTH: [Color; 4] = [[236, 228, 210], [196, 44, 52], [38, 92, 196], [246, 196, 36]];

fn smoothstep(e0: f64, e1: f64, x: f64) -> f64 {
    let t = ((x - e0) / (e1 - e0)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Smooth opacity ramps that saturate at both 0 and 1 over sizeable regions, so
/// every face and vertex of the color tetrahedron is populated.
pub fn synthetic_alphas(w: usize, h: usize) -> AlphaStack {
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
    AlphaStack::from_planes(w, h, &planes).unwrap()
}

pub fn truth_palette() -> OrderedPalette {
    OrderedPalette::new(Background::Opaque(TRUTH[0]), TRUTH[1..].to_vec()).unwrap()
}

pub fn truth_stack(w: usize, h: usize) -> LayerStack {
    LayerStack::new(
        truth_palette(),
        synthetic_alphas(w, h),
        String::new(),
        SolveOptions::default(),
    )
    .unwrap()
}

/// The forward composite, quantized to 8 bits like a real PNG.
pub fn synthetic_image(w: usize, h: usize) -> ColorImage {
    let img = composite_stack(&truth_stack(w, h));
    ColorImage::from_rgb8(w, h, &img.to_bytes()).unwrap()
}

/// For each ground-truth color, the index of the nearest palette color and the
/// worst per-channel error of that match.
pub fn match_palette(palette: &Palette, truth: &[Color]) -> (Vec<usize>, u8) {
    let mut order = Vec::new();
    let mut worst = 0;
    for t in truth {
        let (idx, c) = palette
            .colors()
            .iter()
            .enumerate()
            .min_by_key(|(_, c)| {
                (0..3)
                    .map(|i| (c[i] as i32 - t[i] as i32).pow(2))
                    .sum::<i32>()
            })
            .unwrap();
        order.push(idx);
        for i in 0..3 {
            worst = worst.max(c[i].abs_diff(t[i]));
        }
    }
    (order, worst)
}

pub mod checks {
    use std::time::{Duration, Instant};

    use decompose_core::geometry::Vec3;
    use decompose_core::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::{match_palette, synthetic_image, TRUTH};

    pub fn full_hull(cloud: &ColorCloud) -> Polytope {
        match exact_convex_hull(cloud).unwrap() {
            HullResult::Full(p) => p,
            other => panic!("expected a full-dimensional hull, got {other:?}"),
        }
    }

    fn cloud_of(points: impl IntoIterator<Item = [u8; 3]>) -> ColorCloud {
        ColorCloud::from_counts(3, points.into_iter().map(|[r, g, b]| ([r, g, b, 0], 1))).unwrap()
    }

    /// Every lattice point (with the given step) of an axis-aligned cube.
    pub fn cube_cloud(lo: u8, hi: u8, step: usize) -> ColorCloud {
        let axis: Vec<u8> = (lo..=hi).step_by(step).chain([hi]).collect();
        cloud_of(axis.iter().flat_map(|&r| {
            let axis = axis.clone();
            axis.clone()
                .into_iter()
                .flat_map(move |g| axis.clone().into_iter().map(move |b| [r, g, b]))
        }))
    }

    pub const TETRA: [[u8; 3]; 4] = [[20, 30, 40], [230, 60, 50], [90, 220, 70], [110, 90, 235]];

    /// The tetrahedron's corners plus random integer colors strictly inside.
    pub fn tetra_cloud(seed: u64, interior: usize) -> ColorCloud {
        let corners = full_hull(&cloud_of(TETRA));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points: Vec<[u8; 3]> = TETRA.to_vec();
        while points.len() < 4 + interior {
            let p: [u8; 3] = rng.random();
            let v = Vec3::new(p[0] as f64, p[1] as f64, p[2] as f64);
            if corners.contains(&v, -1e-9) {
                points.push(p);
            }
        }
        cloud_of(points)
    }

    /// Fits planes to the hull surface of `cloud` with default parameters;
    /// returns the plane count and, for each true face, the angle to the
    /// closest fitted normal (the worst such angle).
    pub fn plane_recovery(cloud: &ColorCloud) -> (usize, f64) {
        let hull = full_hull(cloud);
        let params = SimplifyParams::default();
        let samples = sample_hull_surface(&hull, params.surface_samples, params.seed).unwrap();
        let fitted = ransac_planes(&samples, &params).unwrap().planes;
        let truth = hull.distinct_planes(1e-6, 1e-6);
        let worst = truth
            .iter()
            .map(|t| {
                fitted
                    .iter()
                    .map(|f| f.angle_to(t))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        (fitted.len(), worst)
    }

    /// Largest distance from a vertex of either set to the other set.
    pub fn vertex_set_distance(a: &[Vec3], b: &[Vec3]) -> f64 {
        let one_way = |a: &[Vec3], b: &[Vec3]| {
            a.iter()
                .map(|p| b.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        };
        one_way(a, b).max(one_way(b, a))
    }

    /// Intersects a hull's own face planes and compares the vertex sets.
    pub fn halfspace_inverts_hull(cloud: &ColorCloud) -> f64 {
        let hull = full_hull(cloud);
        let rebuilt = halfspace_intersection(&hull.distinct_planes(1e-9, 1e-9)).unwrap();
        vertex_set_distance(&hull.vertices, &rebuilt.vertices)
    }

    pub fn random_palette(rng: &mut ChaCha8Rng, layers: usize) -> OrderedPalette {
        OrderedPalette::new(
            Background::Opaque(rng.random()),
            (0..layers).map(|_| rng.random()).collect(),
        )
        .unwrap()
    }

    /// Analytic gradient of the combined energy against central differences
    /// at `points` random interior opacity configurations; returns the worst
    /// relative error `|g - fd| / max(|g|, |fd|, 1)`.
    pub fn gradient_check(layers: usize, points: usize, seed: u64) -> f64 {
        let (w, h, step) = (5, 4, 1e-5);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let opts = SolveOptions::default();
        let mut worst: f64 = 0.0;
        for _ in 0..points {
            let palette = random_palette(&mut rng, layers);
            let pixels: Vec<f64> = (0..w * h * 3).map(|_| rng.random_range(0.0..255.0)).collect();
            let image = ColorImage::new(w, h, ColorMode::Rgb, pixels).unwrap();
            let x: Vec<f64> = (0..w * h * layers)
                .map(|_| rng.random_range(0.01..0.99))
                .collect();
            let stack = AlphaStack::from_pixel_major(w, h, layers, x.clone()).unwrap();
            let (_, grad) = total_energy_and_gradient(&image, &palette, &stack, &opts);
            let energy_at = |x: Vec<f64>| {
                let s = AlphaStack::from_pixel_major(w, h, layers, x).unwrap();
                total_energy_and_gradient(&image, &palette, &s, &opts).0
            };
            for _ in 0..3 {
                let i = rng.random_range(0..x.len());
                let (mut up, mut down) = (x.clone(), x.clone());
                up[i] += step;
                down[i] -= step;
                let fd = (energy_at(up) - energy_at(down)) / (2.0 * step);
                let rel = (grad[i] - fd).abs() / grad[i].abs().max(fd.abs()).max(1.0);
                worst = worst.max(rel);
            }
        }
        worst
    }

    /// Random in-simplex pixels for a fixed, affinely independent palette.
    /// Returns (worst recomposition error of the direct solver, worst
    /// direct-vs-optimizer opacity difference).
    pub fn direct_vs_optimizer(layers: usize, seed: u64) -> (f64, f64) {
        let (w, h) = (40, 25);
        let colors = [[20, 20, 30], [220, 40, 40], [40, 200, 60], [60, 70, 230]];
        let palette =
            OrderedPalette::new(Background::Opaque(colors[0]), colors[1..=layers].to_vec())
                .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pixels = Vec::with_capacity(w * h * 3);
        for _ in 0..w * h {
            let alphas: Vec<f64> = (0..layers).map(|_| rng.random_range(0.05..0.95)).collect();
            pixels.extend(composite_from_alphas(&alphas, &palette));
        }
        let image = ColorImage::new(w, h, ColorMode::Rgb, pixels).unwrap();

        let mut direct = Vec::with_capacity(w * h * layers);
        let mut recompose_err: f64 = 0.0;
        for p in image.pixels() {
            let a = direct_solve_pixel(p, &palette).unwrap();
            let back = composite_from_alphas(&a, &palette);
            for (x, y) in back.iter().zip(p) {
                recompose_err = recompose_err.max((x - y).abs());
            }
            direct.extend(a);
        }

        let opts = SolveOptions {
            w_opaque: 0.0,
            w_spatial: 0.0,
            pyramid_min_dim: usize::MAX,
            max_iterations_per_level: 5000,
            gradient_tolerance: 1e-10,
            convergence: 0.0,
            ..Default::default()
        };
        let solved = solve_alphas(&image, &palette, &opts, &mut NoProgress).unwrap();
        let diff = solved
            .data()
            .iter()
            .zip(&direct)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        (recompose_err, diff)
    }

    /// A uniform image equal to the top color; the layer beneath it is fully
    /// hidden. Returns the hidden layer's largest solved opacity.
    pub fn hidden_layer_opacity() -> f64 {
        let palette =
            OrderedPalette::new(Background::Opaque([240, 240, 240]), vec![[200, 30, 30], [30, 30, 200]])
                .unwrap();
        let image = ColorImage::filled(16, 16, ColorMode::Rgb, &[30.0, 30.0, 200.0]).unwrap();
        let opts = SolveOptions {
            w_opaque: 100.0,
            w_spatial: 0.0,
            ..Default::default()
        };
        let alphas = solve_alphas(&image, &palette, &opts, &mut NoProgress).unwrap();
        alphas.plane(0).into_iter().fold(0.0, f64::max)
    }

    pub struct RoundTrip {
        pub palette_error: u8,
        pub rmse: f64,
        pub elapsed: Duration,
    }

    /// The whole pipeline on the synthetic image: palette extraction with
    /// defaults, layers put in their true order, then the opacity solve.
    pub fn synthetic_round_trip(size: usize) -> RoundTrip {
        let start = Instant::now();
        let image = synthetic_image(size, size);
        let cloud = collect_pixel_colors(&image).unwrap();
        let result = simplify_palette(&cloud, &SimplifyParams::default()).unwrap();
        let (order, palette_error) = match_palette(&result.palette, &TRUTH);
        let palette = OrderedPalette::from_palette(&result.palette, &order, ColorMode::Rgb).unwrap();
        let opts = SolveOptions {
            w_opaque: 100.0,
            w_spatial: 1000.0,
            ..Default::default()
        };
        let alphas = solve_alphas(&image, &palette, &opts, &mut NoProgress).unwrap();
        let stack = LayerStack::new(palette, alphas, image.content_hash(), opts).unwrap();
        let rmse = reconstruction_error(&image, &composite_stack(&stack)).unwrap().rmse;
        RoundTrip {
            palette_error,
            rmse,
            elapsed: start.elapsed(),
        }
    }

    /// Time until the first (coarsest) level of a 100×64, 5-layer solve is
    /// available.
    pub fn preview_latency() -> Duration {
        let (w, h) = (100, 64);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let palette = random_palette(&mut rng, 5);
        let planes: Vec<Vec<f64>> = (0..5)
            .map(|k| {
                (0..w * h)
                    .map(|i| {
                        let (x, y) = ((i % w) as f64, (i / w) as f64);
                        (0.5 + 0.5 * (x * 0.05 * (k + 1) as f64 + y * 0.07).sin()).clamp(0.0, 1.0)
                    })
                    .collect()
            })
            .collect();
        let truth = LayerStack::new(
            palette.clone(),
            AlphaStack::from_planes(w, h, &planes).unwrap(),
            String::new(),
            SolveOptions::default(),
        )
        .unwrap();
        let image = ColorImage::from_rgb8(w, h, &composite_stack(&truth).to_bytes()).unwrap();

        let start = Instant::now();
        let mut first = None;
        let mut sink = |_: &LevelReport| {
            first.get_or_insert_with(|| start.elapsed());
        };
        solve_alphas(&image, &palette, &SolveOptions::default(), &mut sink).unwrap();
        first.expect("at least one level")
    }

    /// Largest per-channel change in the recomposition of random stacks
    /// after a 16-bit save and load.
    pub fn persistence_drift(seed: u64, stacks: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..stacks {
            let n = rng.random_range(1..=6);
            let (w, h) = (rng.random_range(1..12), rng.random_range(1..12));
            let palette = random_palette(&mut rng, n);
            let planes: Vec<Vec<f64>> =
                (0..n).map(|_| (0..w * h).map(|_| rng.random()).collect()).collect();
            let stack = LayerStack::new(
                palette,
                AlphaStack::from_planes(w, h, &planes).unwrap(),
                String::new(),
                SolveOptions::default(),
            )
            .unwrap();
            let dir = tempfile::tempdir().unwrap();
            save_layerstack(&stack, dir.path()).unwrap();
            let loaded = load_layerstack(dir.path()).unwrap();
            let (a, b) = (composite_stack(&stack), composite_stack(&loaded));
            for (x, y) in a.data().iter().zip(b.data()) {
                worst = worst.max((x - y).abs());
            }
        }
        worst
    }

    /// Largest difference between sequential "over" compositing and the
    /// closed-form product expression over random stacks with up to 6 layers.
    pub fn over_vs_closed_form(seed: u64, stacks: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..stacks {
            let n = rng.random_range(1..=6);
            let (w, h) = (8, 8);
            let palette = random_palette(&mut rng, n);
            let planes: Vec<Vec<f64>> =
                (0..n).map(|_| (0..w * h).map(|_| rng.random()).collect()).collect();
            let stack = LayerStack::new(
                palette.clone(),
                AlphaStack::from_planes(w, h, &planes).unwrap(),
                String::new(),
                SolveOptions::default(),
            )
            .unwrap();
            let img = composite_stack(&stack);
            for y in 0..h {
                for x in 0..w {
                    let closed = composite_from_alphas(stack.alphas.pixel(x, y), &palette);
                    for (a, b) in img.pixel(x, y).iter().zip(&closed) {
                        worst = worst.max((a - b).abs());
                    }
                }
            }
        }
        worst
    }
}
