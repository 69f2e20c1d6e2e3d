use std::f64::consts::PI;

use cxhyp::analysis::{bp_compare, pd_check, BpVerdict, DirectionGrid, PdVerdict};
use cxhyp::bodies::{dilate, BodySpec, StarBody};
use cxhyp::geometry::UnitDirection;
use cxhyp::transforms::{FtConfig, SectionMethod};
use cxhyp::volumes::{evol, hvol, hvol_section};
use proptest::prelude::*;

fn complex_axes(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.1f64..0.8, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hyperbolic_volume_dominates_euclidean(axes in complex_axes(2)) {
        let body = StarBody::complex_ellipsoid(&axes).unwrap();
        let h = hvol(&body, 12).unwrap().value;
        let e = evol(&body, 12).unwrap().value;
        prop_assert!(h >= 64.0 * e * (1.0 - 1e-12));
    }

    #[test]
    fn volumes_are_monotone_under_dilation(axes in complex_axes(2), alpha in 0.2f64..0.99) {
        let body = StarBody::complex_ellipsoid(&axes).unwrap();
        let small = dilate(&body, alpha).unwrap();
        prop_assert!(hvol(&small, 12).unwrap().value <= hvol(&body, 12).unwrap().value);
        let ratio = evol(&small, 12).unwrap().value / evol(&body, 12).unwrap().value;
        prop_assert!((ratio - alpha.powi(4)).abs() < 1e-12);
    }

    #[test]
    fn bp_compare_of_a_body_with_itself_is_consistent(axes in complex_axes(2)) {
        let body = StarBody::complex_ellipsoid(&axes).unwrap();
        let grid = DirectionGrid::orbit_reduced(2, 8, 0).unwrap();
        let r = bp_compare(&body, &body, &grid, 8).unwrap();
        prop_assert_eq!(r.verdict, BpVerdict::Consistent);
    }

    #[test]
    fn transform_is_constant_on_orbits(axes in complex_axes(3), theta in 0.0f64..6.28) {
        let body = StarBody::complex_ellipsoid(&axes).unwrap();
        let xi = UnitDirection::normalize(&[0.3, -0.2, 0.5, 0.1, 0.7, 0.2]).unwrap();
        let grid = DirectionGrid::from_directions(3, vec![xi.clone(), xi.rotate(theta)]).unwrap();
        let cfg = FtConfig { level: 8, ..FtConfig::default() };
        let r = pd_check(&body, &grid, &cfg).unwrap();
        let (a, b) = (r.per_direction[0].ft_value, r.per_direction[1].ft_value);
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{} vs {}", a, b);
    }

    #[test]
    fn spec_strings_round_trip(a in 1.1f64..4.0, b in 0.5f64..4.0, eps in 0.01f64..0.5) {
        let spec = BodySpec::RadialPerturbation {
            of: Box::new(BodySpec::HyperbolicTransform {
                of: Box::new(BodySpec::CounterexampleK { a, b }),
                delta: None,
            }),
            epsilon: eps,
        };
        prop_assert_eq!(BodySpec::parse(&spec.to_string()).unwrap(), spec);
    }
}

#[test]
fn sections_of_balls_do_not_depend_on_direction() {
    let ball = StarBody::ball(0.6, 3).unwrap();
    let grid = DirectionGrid::uniform_seeded(3, 12, 4).unwrap();
    let want = 64.0 * 0.5 * (0.36f64 / 0.64).powi(2) / 2.0 * 2.0 * PI * PI;
    for xi in &grid.directions {
        let v = hvol_section(&ball, xi, 8).unwrap().value;
        assert!((v - want).abs() < 1e-10 * want, "{v} vs {want}");
    }
}

#[test]
fn negative_witness_persists_across_levels() {
    let k = StarBody::counterexample_k(2.0, 2.0).unwrap();
    let grid = DirectionGrid::from_directions(3, vec![UnitDirection::axis(3, 4)]).unwrap();
    let mut values = Vec::new();
    for level in [16, 24, 32] {
        let cfg = FtConfig {
            method: SectionMethod::Quadrature,
            level,
            ..FtConfig::default()
        };
        let r = pd_check(&k, &grid, &cfg).unwrap();
        assert_eq!(r.verdict, PdVerdict::NegativeDirectionFound);
        values.push(r.min_value);
    }
    for v in &values {
        assert!((v - values[0]).abs() < 0.01 * values[0].abs(), "{values:?}");
    }
}

#[test]
fn dilation_keeps_the_sign_of_the_witness() {
    let k = StarBody::counterexample_k(2.0, 2.0).unwrap();
    let grid = DirectionGrid::from_directions(3, vec![UnitDirection::axis(3, 4)]).unwrap();
    for alpha in [0.6, 0.9] {
        let d = dilate(&k, alpha).unwrap();
        let cfg = FtConfig {
            method: SectionMethod::Quadrature,
            level: 12,
            ..FtConfig::default()
        };
        let r = pd_check(&d, &grid, &cfg).unwrap();
        assert_eq!(r.verdict, PdVerdict::NegativeDirectionFound, "alpha = {alpha}: {r:?}");
    }
}

#[test]
fn non_invariant_bodies_are_refused_by_pd_check() {
    let body = StarBody::real_ellipsoid(&[0.5, 0.3, 0.5, 0.5]).unwrap();
    let grid = DirectionGrid::orbit_reduced(2, 4, 0).unwrap();
    assert!(pd_check(&body, &grid, &FtConfig::default()).is_err());
}
