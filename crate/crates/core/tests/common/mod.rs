//! Reference implementations used as oracles by the integration suites.
//! They are written from the box definition alone and share no code with the
//! library beyond the `RotatedBox` accessors.
#![allow(dead_code)]

use std::path::PathBuf;

use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use skewtext::geometry::RotatedBox;

pub fn bx(x: f64, y: f64, h: f64, w: f64, t: f64) -> RotatedBox {
    RotatedBox::new(x, y, h, w, t).unwrap()
}

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

/// World point at local coordinates `(u, v)` of a box: `u` runs along the
/// long side, the long side points along `(cos t, -sin t)` in image
/// coordinates (y down).
pub fn local_to_world(b: &RotatedBox, u: f64, v: f64) -> (f64, f64) {
    let (s, c) = b.theta().sin_cos();
    (b.x() + u * c + v * s, b.y() - u * s + v * c)
}

pub fn inside(b: &RotatedBox, px: f64, py: f64) -> bool {
    let (s, c) = b.theta().sin_cos();
    let dx = px - b.x();
    let dy = py - b.y();
    let u = dx * c - dy * s;
    let v = dx * s + dy * c;
    u.abs() <= b.w() / 2.0 && v.abs() <= b.h() / 2.0
}

/// IoU estimated on an `n x n` grid of cell centers laid over the smaller box.
pub fn raster_iou(a: &RotatedBox, b: &RotatedBox, n: usize) -> f64 {
    let area_a = a.w() * a.h();
    let area_b = b.w() * b.h();
    let (small, other) = if area_a <= area_b { (a, b) } else { (b, a) };
    let step_u = small.w() / n as f64;
    let step_v = small.h() / n as f64;
    let mut hits = 0usize;
    for i in 0..n {
        let u = -small.w() / 2.0 + (i as f64 + 0.5) * step_u;
        for j in 0..n {
            let v = -small.h() / 2.0 + (j as f64 + 0.5) * step_v;
            let (px, py) = local_to_world(small, u, v);
            if inside(other, px, py) {
                hits += 1;
            }
        }
    }
    let inter = hits as f64 / (n * n) as f64 * small.w() * small.h();
    inter / (area_a + area_b - inter)
}

/// IoU of two axis-aligned rectangles from their extents.
pub fn classical_iou(a: &RotatedBox, b: &RotatedBox) -> f64 {
    // An upright canonical box with theta 0 has width along x.
    let ext = |r: &RotatedBox| {
        (
            r.x() - r.w() / 2.0,
            r.y() - r.h() / 2.0,
            r.x() + r.w() / 2.0,
            r.y() + r.h() / 2.0,
        )
    };
    let (al, at, ar, ab) = ext(a);
    let (bl, bt, br, bb) = ext(b);
    let iw = (ar.min(br) - al.max(bl)).max(0.0);
    let ih = (ab.min(bb) - at.max(bt)).max(0.0);
    let inter = iw * ih;
    inter / ((ar - al) * (ab - at) + (br - bl) * (bb - bt) - inter)
}

pub fn shoelace(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len();
    let mut s = 0.0;
    for i in 0..n {
        let (x1, y1) = pts[i];
        let (x2, y2) = pts[(i + 1) % n];
        s += x1 * y2 - x2 * y1;
    }
    0.5 * s.abs()
}

/// Random box with dimensions in `[1, 200]`.
pub fn random_box(rng: &mut ChaCha8Rng, center: (f64, f64)) -> RotatedBox {
    let a: f64 = rng.gen_range(1.0..200.0);
    let b: f64 = rng.gen_range(1.0..200.0);
    let t = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    bx(center.0, center.1, a, b, t)
}

/// Pair of random boxes whose centers are close enough to overlap often.
pub fn random_pair(rng: &mut ChaCha8Rng) -> (RotatedBox, RotatedBox) {
    let center = (rng.gen_range(-300.0..300.0), rng.gen_range(-300.0..300.0));
    let a = random_box(rng, center);
    let reach = a.w() / 2.0 + 20.0;
    let c = (a.x() + rng.gen_range(-reach..reach), a.y() + rng.gen_range(-reach..reach));
    (a, random_box(rng, c))
}

pub fn arb_box() -> impl Strategy<Value = RotatedBox> {
    (-500.0..500.0f64, -500.0..500.0f64, 1.0..200.0f64, 1.0..200.0f64, -10.0..10.0f64)
        .prop_map(|(x, y, h, w, t)| bx(x, y, h, w, t))
}

/// Two boxes with nearby centers.
pub fn arb_close_pair() -> impl Strategy<Value = (RotatedBox, RotatedBox)> {
    (arb_box(), -60.0..60.0f64, -60.0..60.0f64, 1.0..200.0f64, 1.0..200.0f64, -4.0..4.0f64).prop_map(
        |(a, dx, dy, h, w, t)| {
            let b = bx(a.x() + dx, a.y() + dy, h, w, t);
            (a, b)
        },
    )
}
