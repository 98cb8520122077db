mod common;

use common::checks::over_vs_closed_form;
use decompose_core::*;
use proptest::prelude::*;

#[test]
fn sequential_over_equals_closed_form() {
    assert!(over_vs_closed_form(9, 200) < 1e-9);
}

fn stack_strategy() -> impl Strategy<Value = LayerStack> {
    (1usize..=6, 1usize..8, 1usize..8).prop_flat_map(|(n, w, h)| {
        (
            any::<[u8; 3]>(),
            prop::collection::vec(any::<[u8; 3]>(), n),
            // a third of the opacities sit exactly on the bounds
            prop::collection::vec(
                prop_oneof![Just(0.0), Just(1.0), 0.0..=1.0f64],
                n * w * h,
            ),
        )
            .prop_map(move |(bg, layers, data)| {
                LayerStack::new(
                    OrderedPalette::new(Background::Opaque(bg), layers).unwrap(),
                    AlphaStack::from_pixel_major(w, h, n, data).unwrap(),
                    String::new(),
                    SolveOptions::default(),
                )
                .unwrap()
            })
    })
}

proptest! {
    #[test]
    fn over_matches_closed_form(stack in stack_strategy()) {
        let img = composite_stack(&stack);
        for y in 0..stack.height() {
            for x in 0..stack.width() {
                let closed = composite_from_alphas(stack.alphas.pixel(x, y), &stack.palette);
                for (a, b) in img.pixel(x, y).iter().zip(&closed) {
                    prop_assert!((a - b).abs() < 1e-9);
                }
            }
        }
    }

    /// Recoloring a layer leaves every pixel where that layer contributes
    /// nothing bit-identical.
    #[test]
    fn recolor_is_local(stack in stack_strategy(), pick in any::<prop::sample::Index>(), color in any::<[u8; 3]>()) {
        let n = stack.palette.layer_count();
        let index = pick.index(n + 1);
        let recolored = recolor(&stack, index, color).unwrap();
        prop_assert_eq!(&recolored.alphas, &stack.alphas);
        let (before, after) = (composite_stack(&stack), composite_stack(&recolored));
        for y in 0..stack.height() {
            for x in 0..stack.width() {
                let a = stack.alphas.pixel(x, y);
                let own = if index == 0 { 1.0 } else { a[index - 1] };
                // layers strictly above `index`
                let covered = a[index..].contains(&1.0);
                if own == 0.0 || covered {
                    prop_assert_eq!(before.pixel(x, y), after.pixel(x, y));
                }
            }
        }
    }
}

#[test]
fn reconstruction_error_rejects_mismatched_sizes() {
    let a = ColorImage::filled(3, 3, ColorMode::Rgb, &[0.0; 3]).unwrap();
    let b = ColorImage::filled(3, 2, ColorMode::Rgb, &[0.0; 3]).unwrap();
    assert!(matches!(reconstruction_error(&a, &b), Err(Error::DimensionMismatch(_))));
}
