mod common;

use gowers_lab::gowers::{gamma_estimate, gowers_norm, known_gamma, GowersOptions, DEFAULT_BUDGET};
use gowers_lab::grid_core::{rasterize, GridSpec, RasterOptions, ShapeSpec};

#[test]
fn third_order_planar_constant_is_stable() {
    let fx = common::fixtures().gamma;
    let g = gamma_estimate(3, 2, DEFAULT_BUDGET).unwrap();
    assert!(
        (g.value - fx.k3_d2).abs() < fx.k3_d2_tol,
        "{} vs {}",
        g.value,
        fx.k3_d2
    );
    // the constants decrease in k
    assert!(g.value < known_gamma(2, 2).unwrap());
}

#[test]
fn closed_form_constants_are_reproduced() {
    for (k, d, tol) in [(2, 2, 2e-4), (2, 3, 1e-3)] {
        let g = gamma_estimate(k, d, DEFAULT_BUDGET).unwrap();
        let exact = known_gamma(k, d).unwrap();
        assert!(
            (g.value - exact).abs() < tol,
            "k={k} d={d}: {} vs {exact}",
            g.value
        );
    }
}

#[test]
fn unit_square_power() {
    // ||1_{[0,1]^2}||_{U_2}^4 = (2/3)^2
    let grid = GridSpec::new(2, 1.0, 256).unwrap();
    let e = rasterize(
        &ShapeSpec::cuboid(&[-0.5, -0.5], &[0.5, 0.5]),
        &grid,
        &RasterOptions::default(),
    )
    .unwrap();
    let p = gowers_norm(&e, 2, &GowersOptions::default())
        .unwrap()
        .power_value;
    assert!((p - 4.0 / 9.0).abs() < 1e-3, "{p}");
    // and the cube in three dimensions, (2/3)^3
    let grid = GridSpec::new(3, 1.0, 48).unwrap();
    let e = rasterize(
        &ShapeSpec::cuboid(&[-0.5; 3], &[0.5; 3]),
        &grid,
        &RasterOptions::default(),
    )
    .unwrap();
    let p = gowers_norm(&e, 2, &GowersOptions::default())
        .unwrap()
        .power_value;
    assert!((p - 8.0 / 27.0).abs() < 2e-3, "{p}");
}
