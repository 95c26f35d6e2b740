mod common;

use gowers_lab::autocorr::{autocorrelation, ball_autocorrelation_closed_form};
use gowers_lab::grid_core::{
    apply_affine, rasterize, symmetric_difference, AffineMap, GridFunction, GridSpec,
    RasterOptions, ShapeSpec,
};
use proptest::prelude::*;

/// Ellipse `(x - c)^T R diag(a^-2, b^-2) R^T (x - c) <= 1`.
fn ellipse(c: [f64; 2], a: f64, b: f64, angle: f64) -> ShapeSpec {
    let (s, co) = angle.sin_cos();
    let (p, q) = (a.powi(-2), b.powi(-2));
    let m = vec![
        vec![co * co * p + s * s * q, co * s * (p - q)],
        vec![co * s * (p - q), s * s * p + co * co * q],
    ];
    ShapeSpec::ellipsoid(&c, m)
}

fn ellipse_strategy() -> impl Strategy<Value = ShapeSpec> {
    (
        -0.2f64..0.2,
        -0.2f64..0.2,
        0.15f64..0.5,
        0.15f64..0.5,
        0.0f64..3.2,
    )
        .prop_map(|(x, y, a, b, t)| ellipse([x, y], a, b, t))
}

fn binary(f: GridFunction) -> GridFunction {
    let values = f
        .values()
        .iter()
        .map(|&v| if v > 0.5 { 1.0 } else { 0.0 })
        .collect();
    GridFunction::new(*f.spec(), values).unwrap()
}

fn shear_strategy() -> impl Strategy<Value = AffineMap> {
    (-0.5f64..0.5, -0.5f64..0.5, -0.1f64..0.1, -0.1f64..0.1).prop_map(|(u, l, x, y)| {
        // upper and lower unit shears: determinant 1
        AffineMap::new(vec![vec![1.0 + u * l, u], vec![l, 1.0]], vec![x, y]).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn raster_measure_error_is_first_order(shape in ellipse_strategy()) {
        let exact = shape.exact_measure().unwrap();
        let mut errors = Vec::new();
        for n in [32usize, 64, 128, 256] {
            let g = GridSpec::new(2, 1.0, n).unwrap();
            for opts in [RasterOptions::default(), RasterOptions::binary()] {
                let err = (rasterize(&shape, &g, &opts).unwrap().measure() - exact).abs();
                prop_assert!(err <= 1.0 / n as f64, "n={} err={}", n, err);
                errors.push(err);
            }
        }
    }

    #[test]
    fn symmetric_difference_is_a_metric(seeds in any::<[u64; 3]>(), n in 4usize..24) {
        let g = GridSpec::new(2, 1.0, n).unwrap();
        let [a, b, c] = seeds.map(|s| binary(common::random_function(g, s)));
        let d = |x: &GridFunction, y: &GridFunction| symmetric_difference(x, y).unwrap();
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
    }

    #[test]
    fn affine_images_compose(outer in shear_strategy(), inner in shear_strategy(), shape in ellipse_strategy()) {
        let n = 128;
        let g = GridSpec::new(2, 2.0, n).unwrap();
        let nested = apply_affine(&outer, &apply_affine(&inner, &shape).unwrap()).unwrap();
        let composed = apply_affine(&outer.compose(&inner).unwrap(), &shape).unwrap();
        let opts = RasterOptions::binary();
        let gap = symmetric_difference(&rasterize(&nested, &g, &opts).unwrap(), &rasterize(&composed, &g, &opts).unwrap()).unwrap();
        // both rasters sit within C / n of the exact measure
        prop_assert!(gap <= 2.0 * 2.0 / n as f64, "gap {}", gap);
    }
}

/// Largest gap between the rasterized ball autocorrelation and the lens volume.
fn ball_autocorrelation_error(d: usize, n: usize, r: f64) -> f64 {
    let g = GridSpec::new(d, 1.0, n).unwrap();
    let ball = rasterize(
        &ShapeSpec::ball(&vec![0.0; d], r),
        &g,
        &RasterOptions::default(),
    )
    .unwrap();
    let a = autocorrelation(&ball).unwrap().values;
    let sg = *a.spec();
    (0..sg.len())
        .map(|i| {
            let s = sg.cell_center(i);
            let len = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
            (a.values()[i] - ball_autocorrelation_closed_form(d, r, len).unwrap()).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn ball_autocorrelation_converges_to_lens_volumes() {
    for (d, sizes) in [
        (1, [64usize, 128, 256]),
        (2, [32, 64, 128]),
        (3, [16, 24, 32]),
    ] {
        let errors: Vec<f64> = sizes
            .iter()
            .map(|&n| ball_autocorrelation_error(d, n, 0.4))
            .collect();
        for (&n, &e) in sizes.iter().zip(&errors) {
            // measured n * err lies in [0.55, 1.4]; endpoint cells that are
            // partly filled keep the error first order
            assert!(e <= 2.0 / n as f64, "d={d} n={n} err={e}");
        }
        assert!(errors[2] < errors[0], "d={d}: {errors:?}");
    }
}
