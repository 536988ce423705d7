mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use common::*;
use skewtext::geometry::{
    angle_diff, angle_sub, canonicalize, intersection_polygon, normalize_angle, polygon_area,
    rotate_ground_truth, skew_iou, ImageSize, Point, Polygon, ANGLE_MAX, ANGLE_MIN,
};

fn same_point_set(a: &[Point], b: &[(f64, f64)], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().all(|p| b.iter().any(|q| (p.x - q.0).abs() <= tol && (p.y - q.1).abs() <= tol))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn normalize_is_idempotent_and_in_range(t in -1e3..1e3f64) {
        let n = normalize_angle(t).unwrap();
        prop_assert!((ANGLE_MIN..ANGLE_MAX).contains(&n));
        prop_assert_eq!(normalize_angle(n).unwrap(), n);
        // Same orientation modulo pi.
        let k = (t - n) / PI;
        prop_assert!((k - k.round()).abs() < 1e-9);
    }

    #[test]
    fn angle_sub_stays_in_range(a in -10.0..10.0f64, b in -10.0..10.0f64) {
        let d = angle_sub(a, b).unwrap();
        prop_assert!((ANGLE_MIN..ANGLE_MAX).contains(&d));
        prop_assert!(angle_diff(d, a - b) < 1e-9);
    }

    #[test]
    fn iou_symmetric_bounded((a, b) in arb_close_pair()) {
        let ab = skew_iou(&a, &b);
        prop_assert_eq!(ab.to_bits(), skew_iou(&b, &a).to_bits());
        prop_assert!((0.0..=1.0).contains(&ab));
    }

    #[test]
    fn iou_with_self_is_one(a in arb_box()) {
        prop_assert!((skew_iou(&a, &a) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn iou_invariant_under_rigid_motion(
        (a, b) in arb_close_pair(),
        tx in -300.0..300.0f64,
        ty in -300.0..300.0f64,
        phi in -PI..PI,
    ) {
        let (s, c) = phi.sin_cos();
        let moved = |r: &skewtext::RotatedBox| {
            bx(c * r.x() + s * r.y() + tx, -s * r.x() + c * r.y() + ty, r.h(), r.w(), r.theta() + phi)
        };
        let before = skew_iou(&a, &b);
        let after = skew_iou(&moved(&a), &moved(&b));
        prop_assert!((before - after).abs() < 1e-6, "{} vs {}", before, after);
    }

    #[test]
    fn upright_boxes_match_classical_iou(
        x in -100.0..100.0f64, y in -100.0..100.0f64,
        h1 in 1.0..100.0f64, w1 in 1.0..100.0f64,
        h2 in 1.0..100.0f64, w2 in 1.0..100.0f64,
        dx in -80.0..80.0f64, dy in -80.0..80.0f64,
    ) {
        // Keep w >= h so theta stays 0 after canonicalization.
        let a = bx(x, y, h1.min(w1), h1.max(w1), 0.0);
        let b = bx(x + dx, y + dy, h2.min(w2), h2.max(w2), 0.0);
        prop_assert_eq!(a.theta(), 0.0);
        prop_assert_eq!(b.theta(), 0.0);
        prop_assert!((skew_iou(&a, &b) - classical_iou(&a, &b)).abs() < 1e-9);
    }

    #[test]
    fn triangulated_area_matches_shoelace((a, b) in arb_close_pair()) {
        let poly = intersection_polygon(&a, &b);
        let pts: Vec<(f64, f64)> = poly.vertices.iter().map(|p| (p.x, p.y)).collect();
        let expected = if pts.len() < 3 { 0.0 } else { shoelace(&pts) };
        let scale = 1.0 + a.area().max(b.area());
        prop_assert!((polygon_area(&poly) - expected).abs() <= 1e-9 * scale);
    }

    #[test]
    fn triangulated_area_on_random_convex_polygons(
        mut angles in prop::collection::vec(0.0..2.0 * PI, 3..12),
        r in 1.0..500.0f64,
        cx in -100.0..100.0f64,
        cy in -100.0..100.0f64,
    ) {
        // Points on a circle in angular order form a convex polygon.
        angles.sort_by(f64::total_cmp);
        let pts: Vec<(f64, f64)> = angles.iter().map(|t| (cx + r * t.cos(), cy + r * t.sin())).collect();
        let poly = Polygon::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect());
        prop_assert!((polygon_area(&poly) - shoelace(&pts)).abs() <= 1e-9 * r * r);
    }

    #[test]
    fn rotation_round_trip(
        a in arb_box(),
        alpha in 1e-6..(2.0 * PI - 1e-6),
        iw in 1u32..2000, ih in 1u32..2000,
    ) {
        let img = ImageSize::new(iw, ih).unwrap();
        let there = rotate_ground_truth(&a, alpha, img).unwrap();
        let back = rotate_ground_truth(&there, 2.0 * PI - alpha, img).unwrap();
        prop_assert!((back.x() - a.x()).abs() < 1e-6);
        prop_assert!((back.y() - a.y()).abs() < 1e-6);
        prop_assert!((back.h() - a.h()).abs() < 1e-6);
        prop_assert!((back.w() - a.w()).abs() < 1e-6);
        // Orientations compared modulo pi: a box on the angle seam may come
        // back on the other side of it.
        prop_assert!(angle_diff(back.theta(), a.theta()) < 1e-6);
    }

    #[test]
    fn canonicalize_preserves_vertices(
        x in -500.0..500.0f64, y in -500.0..500.0f64,
        h in 1.0..200.0f64, w in 1.0..200.0f64,
        t in -20.0..20.0f64,
    ) {
        let raw: Vec<(f64, f64)> = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
            .iter()
            .map(|&(su, sv)| {
                let (s, c) = t.sin_cos();
                let (u, v) = (su * w / 2.0, sv * h / 2.0);
                (x + u * c + v * s, y - u * s + v * c)
            })
            .collect();
        let b = canonicalize(x, y, h, w, t).unwrap();
        prop_assert!(b.w() >= b.h());
        prop_assert!((ANGLE_MIN..ANGLE_MAX).contains(&b.theta()));
        prop_assert!(same_point_set(&b.vertices(), &raw, 1e-9));
    }
}

#[test]
fn skew_iou_agrees_with_rasterization() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pairs: Vec<_> = (0..1000).map(|_| random_pair(&mut rng)).collect();
    let worst = pairs
        .par_iter()
        .map(|(a, b)| (skew_iou(a, b) - raster_iou(a, b, 1000)).abs())
        .reduce(|| 0.0, f64::max);
    assert!(worst < 1e-2, "worst deviation {worst}");
}

#[test]
fn touching_and_disjoint_boxes() {
    let a = bx(0.0, 0.0, 2.0, 4.0, 0.0);
    assert_eq!(skew_iou(&a, &bx(4.0, 0.0, 2.0, 4.0, 0.0)), 0.0);
    assert_eq!(skew_iou(&a, &bx(100.0, 0.0, 2.0, 4.0, 0.3)), 0.0);
}

#[test]
fn quarter_turned_square_is_the_same_box() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let s = rng.gen_range(1.0..50.0);
        let t = rng.gen_range(-1.0..1.0);
        let a = bx(1.0, 2.0, s, s, t);
        let b = bx(1.0, 2.0, s, s, t + FRAC_PI_2);
        assert_abs_diff_eq!(skew_iou(&a, &b), 1.0, epsilon = 1e-9);
    }
}
