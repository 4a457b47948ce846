mod common;

use std::f64::consts::PI;

use common::{integrate, rel_l2};
use dnlslab_core::spectral::{fourier_transform, norm, Direction, Field, Grid, NormSpec, Space};
use dnlslab_core::{Complex64, Error};
use proptest::prelude::*;

fn half_gaussian(grid: &Grid) -> Field {
    Field::from_fn(grid, |x| Complex64::new((-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0)).unwrap()
}

#[test]
fn grid_definition_arithmetic() {
    let g = Grid::new(1, 8, 2.0 * PI).unwrap();
    assert!((g.spacing() - PI / 4.0).abs() < 1e-15);
    assert!((g.dual_spacing() - 1.0).abs() < 1e-15);
    assert_eq!(g.axis_frequencies(), vec![-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
    assert_eq!(g.axis_points()[0], -PI);

    let g = Grid::new(1, 4096, 256.0).unwrap();
    assert!((g.dual_spacing() - 2.0 * PI / 256.0).abs() < 1e-16);
    assert!((g.spacing() * g.dual_spacing() * 4096.0 - 2.0 * PI).abs() < 1e-12);

    assert!(Grid::new(2, 6, 1.0).is_ok());
    assert!(matches!(Grid::new(2, 7, 1.0), Err(Error::InvalidGrid(_))));
    assert!(Grid::new(1, 8, 0.0).is_err());
    assert!(Grid::new(4, 8, 1.0).is_err());
    assert!(Grid::with_max_dim(4, 4, 1.0, 4).is_ok());
}

#[test]
fn gaussian_is_self_dual() {
    for (points, length) in [(256, 32.0), (512, 40.0)] {
        let g = Grid::new(1, points, length).unwrap();
        let f = half_gaussian(&g);
        let hat = fourier_transform(&f, Direction::Forward).unwrap();
        assert_eq!(hat.space(), Space::Frequency);
        let expect: Vec<Complex64> = g
            .axis_frequencies()
            .iter()
            .map(|k| Complex64::new((-0.5 * k * k).exp(), 0.0))
            .collect();
        assert!(rel_l2(hat.samples(), &expect) < 1e-10);
    }
}

#[test]
fn transform_checks_space_tag() {
    let g = Grid::new(1, 16, 4.0).unwrap();
    let f = half_gaussian(&g);
    assert!(matches!(
        fourier_transform(&f, Direction::Inverse),
        Err(Error::SpaceMismatch { .. })
    ));
}

#[test]
fn gaussian_norms_match_quadrature() {
    let g = Grid::new(1, 512, 40.0).unwrap();
    let f = half_gaussian(&g);
    assert!((norm(&f, NormSpec::L2) - PI.powf(0.25)).abs() < 1e-12);

    // ‖f‖²_{H¹} = ∫ (1 + ξ²) e^{-ξ²} dξ
    let h1_sq = integrate(&|k: f64| (1.0 + k * k) * (-k * k).exp(), -40.0, 40.0, 1e-14);
    let h1 = norm(&f, NormSpec::Hs(1));
    assert!((h1 - h1_sq.sqrt()).abs() < 1e-10, "{h1} vs {}", h1_sq.sqrt());

    let l1 = integrate(&|x: f64| (-0.5 * x * x).exp(), -20.0, 20.0, 1e-14);
    assert!((norm(&f, NormSpec::L1) - l1).abs() < 1e-10);
    assert!((norm(&f, NormSpec::Linf) - 1.0).abs() < 1e-15);
}

#[test]
fn sigma_is_max_of_components() {
    for dim in [1, 2] {
        let g = Grid::new(dim, 64, 16.0).unwrap();
        let f = Field::from_fn(&g, |x| Complex64::new((-(x[0] - 1.0).powi(2)).exp(), 0.0)).unwrap();
        let s = dnlslab_core::spectral::sigma_index(dim);
        let expect = norm(&f, NormSpec::Hs(s)).max(norm(&f, NormSpec::FHs(s)));
        assert_eq!(norm(&f, NormSpec::Sigma), expect);
    }
}

#[test]
fn zero_field_has_zero_norms() {
    let g = Grid::new(2, 16, 6.0).unwrap();
    let z = Field::zeros(&g, Space::Physical);
    for spec in [NormSpec::L1, NormSpec::L2, NormSpec::Linf, NormSpec::Hs(3), NormSpec::FHs(2), NormSpec::Sigma] {
        assert_eq!(norm(&z, spec), 0.0);
    }
}

fn blob(grid: &Grid, params: &[(f64, f64, f64, f64)]) -> Field {
    Field::from_fn(grid, |x| {
        params
            .iter()
            .map(|&(c, w, re, im)| Complex64::new(re, im) * (-(x[0] - c).powi(2) / (2.0 * w * w)).exp())
            .sum()
    })
    .unwrap()
}

fn blob_params() -> impl Strategy<Value = Vec<(f64, f64, f64, f64)>> {
    prop::collection::vec((-8.0..8.0f64, 0.7..2.5f64, -1.0..1.0f64, -1.0..1.0f64), 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn plancherel_and_round_trip(params in blob_params()) {
        let g = Grid::new(1, 256, 48.0).unwrap();
        let f = blob(&g, &params);
        prop_assume!(!f.is_zero());
        let hat = fourier_transform(&f, Direction::Forward).unwrap();
        let a = norm(&f, NormSpec::L2);
        prop_assert!((norm(&hat, NormSpec::L2) - a).abs() <= 1e-12 * a);
        let back = fourier_transform(&hat, Direction::Inverse).unwrap();
        prop_assert!(rel_l2(back.samples(), f.samples()) <= 1e-12);
    }

    #[test]
    fn sobolev_norms_are_monotone(params in blob_params(), s in 0u32..4) {
        let g = Grid::new(1, 128, 40.0).unwrap();
        let f = blob(&g, &params);
        let lo = norm(&f, NormSpec::Hs(s));
        let hi = norm(&f, NormSpec::Hs(s + 1));
        prop_assert!(lo <= hi * (1.0 + 1e-14));
        prop_assert!(norm(&f, NormSpec::FHs(s)) <= norm(&f, NormSpec::FHs(s + 1)) * (1.0 + 1e-14));
    }

    #[test]
    fn plancherel_in_two_dimensions(params in blob_params()) {
        let g = Grid::new(2, 32, 24.0).unwrap();
        let f = blob(&g, &params);
        let a = norm(&f, NormSpec::L2);
        let hat = fourier_transform(&f, Direction::Forward).unwrap();
        prop_assert!((norm(&hat, NormSpec::L2) - a).abs() <= 1e-12 * a.max(1e-300));
    }
}
