//! Randomized invariants: facts that must hold for every valid input, checked
//! over seeded generator sweeps rather than hand-picked examples.

use proptest::prelude::*;
use std::f64::consts::PI;

use riesz_core::contour::{attach_quadrature, segment_contour, ContourStyle};
use riesz_core::instance::{generate_instance, InstanceSpec, PerturbationStyle};
use riesz_core::linalg::{cplx, spectral_norm, CMat};
use riesz_core::resolvent::resolvent_t_matrix;
use riesz_core::spectral::{
    check_hypothesis, resolvent_norm_t, HermitianOperator, Segment, SegmentFamily,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Families sort their segments, report the minimal adjacent gap, label
    /// segments by consecutive integers centred on zero, and measure zero
    /// distance to points inside a segment.
    #[test]
    fn segment_families_sort_and_expose_the_minimal_gap(
        start in -5.0f64..5.0,
        lens in prop::collection::vec(0.05f64..2.0, 2..=6),
        gap_extras in prop::collection::vec(0.0f64..2.5, 6),
        base_gap in 0.05f64..1.0,
        rot in 0usize..6,
    ) {
        let mut segments = Vec::new();
        let mut x = start;
        let mut min_gap = f64::INFINITY;
        for (i, len) in lens.iter().enumerate() {
            segments.push(Segment::new(x, x + len).unwrap());
            if i + 1 < lens.len() {
                let g = base_gap + gap_extras[i];
                min_gap = min_gap.min(g);
                x += len + g;
            }
        }
        let ordered = segments.clone();
        let turns = rot % segments.len();
        segments.rotate_left(turns);
        let family = SegmentFamily::new(segments).unwrap();

        prop_assert_eq!(family.segments(), &ordered[..]);
        prop_assert!((family.gap() - min_gap).abs() <= 1e-12 * (1.0 + min_gap));

        let (lo, hi) = family.span();
        prop_assert_eq!(lo, ordered[0].alpha());
        prop_assert_eq!(hi, ordered[ordered.len() - 1].beta());

        prop_assert_eq!(family.label(family.zero_offset()), 0);
        for j in 0..family.len() {
            prop_assert_eq!(family.label(j), j as i64 - family.zero_offset() as i64);
            let mid = cplx((ordered[j].alpha() + ordered[j].beta()) / 2.0, 0.0);
            prop_assert_eq!(family.distance_to(mid), 0.0);
            let (idx, dist) = family.nearest_segment(mid);
            prop_assert_eq!(idx, j);
            prop_assert_eq!(dist, 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// The smallness hypothesis holds exactly when `b < d/2`; the reported
    /// margin is `d/2 - b` and `b` tracks the requested ratio of the gap.
    #[test]
    fn hypothesis_holds_exactly_below_half_the_gap(
        b_ratio in 0.0f64..1.6,
        seed in any::<u64>(),
    ) {
        let spec = InstanceSpec {
            n: 6,
            segments: vec![(0.0, 0.8), (2.0, 2.9), (4.5, 5.0)],
            cluster_sizes: vec![2, 2, 2],
            b_ratio,
            seed,
            perturbation_style: PerturbationStyle::DenseRandom,
        };
        let (pair, family) = generate_instance(&spec).unwrap();
        let h = check_hypothesis(&pair, &family).unwrap();

        prop_assert_eq!(h.holds, h.b < h.d / 2.0);
        prop_assert_eq!(h.d, family.gap());
        prop_assert_eq!(h.b, pair.b_norm());
        prop_assert!((h.margin - (h.d / 2.0 - h.b)).abs() <= 1e-12 * (1.0 + h.d));
        prop_assert!((h.b - b_ratio * h.d / 2.0).abs() <= 1e-9 * (1.0 + h.b));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// For Hermitian `T` the resolvent norm is exactly the reciprocal
    /// distance to the spectrum: the computed matrix must agree with the
    /// analytic value.
    #[test]
    fn hermitian_resolvent_norm_is_reciprocal_distance(
        eigs in prop::collection::vec(-4.0f64..4.0, 2..=10),
        re in -6.0f64..6.0,
        im in 0.05f64..3.0,
    ) {
        let n = eigs.len();
        let m = CMat::from_fn(n, n, |i, j| {
            if i == j { cplx(eigs[i], 0.0) } else { cplx(0.0, 0.0) }
        });
        let t = HermitianOperator::new(m).unwrap();
        let lambda = cplx(re, im);
        let dist = eigs
            .iter()
            .map(|e| (lambda - cplx(*e, 0.0)).norm())
            .fold(f64::INFINITY, f64::min);

        let rm = resolvent_t_matrix(&t, lambda).unwrap();
        prop_assert!((spectral_norm(&rm) * dist - 1.0).abs() <= 1e-8);
        prop_assert!((resolvent_norm_t(&t, lambda).unwrap() * dist - 1.0).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Closed contour quadrature reproduces the Cauchy integrals: zero for
    /// entire integrands, `2 pi i` for a simple pole enclosed once, zero for
    /// a pole outside, with positive orientation.
    #[test]
    fn closed_contours_reproduce_cauchy_integrals(
        alpha in -3.0f64..3.0,
        len in 0.1f64..2.5,
        r in 0.1f64..1.5,
        rectangle in any::<bool>(),
    ) {
        let seg = Segment::new(alpha, alpha + len).unwrap();
        let style = if rectangle { ContourStyle::Rectangle } else { ContourStyle::Stadium };
        let contour = attach_quadrature(&segment_contour(&seg, r, style), 48);

        let mid = cplx(alpha + len / 2.0, 0.0);
        let outside = cplx(alpha + len / 2.0, 3.0 * r + 1.0);
        let size = len + 2.0 * r;

        let ones = contour.integrate(|_| cplx(1.0, 0.0));
        prop_assert!(ones.norm() <= 1e-10 * (1.0 + contour.length()));

        let squares = contour.integrate(|z| (z - mid) * (z - mid));
        prop_assert!(squares.norm() <= 1e-9 * (1.0 + size).powi(3));

        let pole_in = contour.integrate(|z| (z - mid).inv());
        prop_assert!((pole_in - cplx(0.0, 2.0 * PI)).norm() <= 1e-8);

        let pole_out = contour.integrate(|z| (z - outside).inv());
        prop_assert!(pole_out.norm() <= 1e-8);

        prop_assert_eq!(contour.winding_number(mid), 1);
        prop_assert!(!contour.contains(outside));
        prop_assert!(contour.signed_area() > 0.0);
    }
}
