//! Rotated boxes, angle arithmetic and the skew IoU kernel.
//!
//! Boxes use the 5-tuple `(x, y, h, w, theta)`: `(x, y)` is the center, `w`
//! the long side, `h` the short side and `theta` the orientation of the long
//! side, kept in `[-pi/4, 3pi/4)`.
//!
//! Coordinates are image coordinates (y grows downwards). A box with
//! orientation `theta` has its long side along `(cos theta, -sin theta)`, so a
//! positive angle tilts the box anticlockwise as it appears on screen. The
//! same convention drives [`rotate_ground_truth`] and the rotated RoI pooling
//! sampler.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::error::{invalid, Result};

/// Lower (inclusive) end of the canonical angle range.
pub const ANGLE_MIN: f64 = -FRAC_PI_4;
/// Upper (exclusive) end of the canonical angle range.
pub const ANGLE_MAX: f64 = 3.0 * FRAC_PI_4;

/// Parallel-edge rejection threshold, applied to the sine of the angle
/// between the two edges.
const PARALLEL_EPS: f64 = 1e-9;
/// Points of the intersection set closer than this are merged.
const DEDUP_EPS: f64 = 1e-8;
/// Slack on segment parameters and containment tests.
const BOUNDARY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    #[inline]
    fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn distance(self, o: Point) -> f64 {
        self.sub(o).norm()
    }
}

/// Ordered list of vertices. Intersections produced by this module are convex
/// and anticlockwise (positive signed area).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polygon {
    pub vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Self {
        Self { vertices }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn area(&self) -> f64 {
        polygon_area(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ImageSize {
    pub width: u32,
    pub height: u32,
}

impl ImageSize {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(invalid(format!(
                "image size must be at least 1x1, got {width}x{height}"
            )));
        }
        Ok(Self { width, height })
    }
}

/// A canonical rotated rectangle.
///
/// Every constructor canonicalizes: `w >= h`, `theta` in `[-pi/4, 3pi/4)`, all
/// fields finite and dimensions strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedBox {
    x: f64,
    y: f64,
    h: f64,
    w: f64,
    theta: f64,
}

impl RotatedBox {
    /// Builds a box from raw parameters, swapping sides and wrapping the
    /// angle as needed. See [`canonicalize`].
    pub fn new(x: f64, y: f64, h: f64, w: f64, theta: f64) -> Result<Self> {
        canonicalize(x, y, h, w, theta)
    }

    /// Axis-aligned box from its top-left corner and extents.
    pub fn from_xywh(left: f64, top: f64, width: f64, height: f64) -> Result<Self> {
        Self::new(left + width / 2.0, top + height / 2.0, height, width, 0.0)
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.x
    }
    #[inline]
    pub fn y(&self) -> f64 {
        self.y
    }
    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }
    #[inline]
    pub fn w(&self) -> f64 {
        self.w
    }
    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    #[inline]
    pub fn center(&self) -> Point {
        Point::new(self.x, self.y)
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// Fields in `(x, y, h, w, theta)` order.
    pub fn to_array(&self) -> [f64; 5] {
        [self.x, self.y, self.h, self.w, self.theta]
    }

    /// The four corners, anticlockwise.
    pub fn vertices(&self) -> [Point; 4] {
        box_vertices(self)
    }

    /// Maps an image point into the box frame: `u` along the long side, `v`
    /// along the short side.
    #[inline]
    fn local_coords(&self, p: Point) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        let dx = p.x - self.x;
        let dy = p.y - self.y;
        (dx * c - dy * s, dx * s + dy * c)
    }

    /// Point-in-box test with a small boundary slack.
    pub fn contains(&self, p: Point) -> bool {
        let (u, v) = self.local_coords(p);
        let hw = self.w / 2.0;
        let hh = self.h / 2.0;
        u.abs() <= hw + BOUNDARY_EPS * (1.0 + hw) && v.abs() <= hh + BOUNDARY_EPS * (1.0 + hh)
    }

    /// Radius of the circumscribed circle.
    #[inline]
    fn circumradius(&self) -> f64 {
        0.5 * self.w.hypot(self.h)
    }

    /// Same box with width and height multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(invalid(format!("scale factor must be positive, got {factor}")));
        }
        Self::new(self.x, self.y, self.h * factor, self.w * factor, self.theta)
    }

    fn total_cmp(&self, o: &Self) -> Ordering {
        self.x
            .total_cmp(&o.x)
            .then(self.y.total_cmp(&o.y))
            .then(self.h.total_cmp(&o.h))
            .then(self.w.total_cmp(&o.w))
            .then(self.theta.total_cmp(&o.theta))
    }
}

/// Wraps a finite angle into `[-pi/4, 3pi/4)`. Angles already in range are
/// returned unchanged, which makes the operation idempotent.
pub(crate) fn wrap_angle(theta: f64) -> f64 {
    if (ANGLE_MIN..ANGLE_MAX).contains(&theta) {
        return theta;
    }
    let mut t = (theta - ANGLE_MIN).rem_euclid(PI) + ANGLE_MIN;
    // rem_euclid may round up to the modulus itself.
    while t >= ANGLE_MAX {
        t -= PI;
    }
    while t < ANGLE_MIN {
        t += PI;
    }
    t
}

/// Returns `theta + k*pi` for the unique integer `k` that puts the result in
/// `[-pi/4, 3pi/4)`.
pub fn normalize_angle(theta: f64) -> Result<f64> {
    if !theta.is_finite() {
        return Err(invalid(format!("angle must be finite, got {theta}")));
    }
    Ok(wrap_angle(theta))
}

/// `a ⊖ b`: the difference `a - b` wrapped into `[-pi/4, 3pi/4)`.
pub fn angle_sub(a: f64, b: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(invalid(format!("angles must be finite, got {a} and {b}")));
    }
    Ok(wrap_angle(a - b))
}

/// Unsigned angle between two orientations modulo `pi`, in `[0, pi/2]`.
///
/// Agrees with `|angle_sub(a, b)|` whenever either is below `pi/4`, and is
/// symmetric in its arguments.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    if d > FRAC_PI_2 {
        PI - d
    } else {
        d
    }
}

/// Puts raw box parameters into canonical form: swaps the sides with a
/// quarter turn when `w < h`, then wraps the angle.
pub fn canonicalize(x: f64, y: f64, h: f64, w: f64, theta: f64) -> Result<RotatedBox> {
    if !(x.is_finite() && y.is_finite() && h.is_finite() && w.is_finite() && theta.is_finite()) {
        return Err(invalid(format!(
            "box fields must be finite, got ({x}, {y}, {h}, {w}, {theta})"
        )));
    }
    if h <= 0.0 || w <= 0.0 {
        return Err(invalid(format!(
            "box dimensions must be positive, got h={h}, w={w}"
        )));
    }
    let (h, w, theta) = if w < h {
        (w, h, theta + FRAC_PI_2)
    } else {
        (h, w, theta)
    };
    Ok(RotatedBox {
        x,
        y,
        h,
        w,
        // Adding zero turns -0.0 into 0.0.
        theta: wrap_angle(theta) + 0.0,
    })
}

/// Corners of the box: the axis-aligned `w x h` rectangle rotated about the
/// center, listed anticlockwise starting from the local `(-w/2, -h/2)` corner.
pub fn box_vertices(b: &RotatedBox) -> [Point; 4] {
    let (s, c) = b.theta.sin_cos();
    let hw = b.w / 2.0;
    let hh = b.h / 2.0;
    let corner = |u: f64, v: f64| Point::new(b.x + u * c + v * s, b.y - u * s + v * c);
    [
        corner(-hw, -hh),
        corner(hw, -hh),
        corner(hw, hh),
        corner(-hw, hh),
    ]
}

/// Ground-truth box after rotating the whole image by `alpha` about its
/// center. Sizes are unchanged; the orientation becomes `theta + alpha`.
pub fn rotate_ground_truth(b: &RotatedBox, alpha: f64, img: ImageSize) -> Result<RotatedBox> {
    if !(alpha.is_finite() && (0.0..2.0 * PI).contains(&alpha)) {
        return Err(invalid(format!("rotation angle must lie in [0, 2pi), got {alpha}")));
    }
    let cx = f64::from(img.width) / 2.0;
    let cy = f64::from(img.height) / 2.0;
    let (s, c) = alpha.sin_cos();
    let dx = b.x - cx;
    let dy = b.y - cy;
    let x = c * dx + s * dy + cx;
    let y = -s * dx + c * dy + cy;
    RotatedBox::new(x, y, b.h, b.w, b.theta + alpha)
}

fn segment_intersection(p: Point, p2: Point, q: Point, q2: Point) -> Option<Point> {
    let r = p2.sub(p);
    let s = q2.sub(q);
    let denom = r.cross(s);
    if denom.abs() <= PARALLEL_EPS * r.norm() * s.norm() {
        return None;
    }
    let qp = q.sub(p);
    let t = qp.cross(s) / denom;
    let u = qp.cross(r) / denom;
    let range = -BOUNDARY_EPS..=1.0 + BOUNDARY_EPS;
    if range.contains(&t) && range.contains(&u) {
        Some(Point::new(p.x + t * r.x, p.y + t * r.y))
    } else {
        None
    }
}

/// Convex intersection region of two boxes, anticlockwise about its
/// centroid. Empty when the boxes are disjoint.
pub fn intersection_polygon(a: &RotatedBox, b: &RotatedBox) -> Polygon {
    let va = a.vertices();
    let vb = b.vertices();
    let mut pts: Vec<Point> = Vec::with_capacity(24);

    for i in 0..4 {
        for j in 0..4 {
            if let Some(p) = segment_intersection(va[i], va[(i + 1) % 4], vb[j], vb[(j + 1) % 4]) {
                pts.push(p);
            }
        }
    }
    pts.extend(va.iter().copied().filter(|&v| b.contains(v)));
    pts.extend(vb.iter().copied().filter(|&v| a.contains(v)));

    let mut uniq: Vec<Point> = Vec::with_capacity(pts.len());
    for p in pts {
        if uniq.iter().all(|q| q.distance(p) >= DEDUP_EPS) {
            uniq.push(p);
        }
    }
    sort_anticlockwise(&mut uniq);
    Polygon::new(uniq)
}

fn sort_anticlockwise(pts: &mut [Point]) {
    if pts.len() < 2 {
        return;
    }
    let n = pts.len() as f64;
    let cx = pts.iter().map(|p| p.x).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p.y).sum::<f64>() / n;
    let key = |p: &Point| {
        let dx = p.x - cx;
        let dy = p.y - cy;
        (dy.atan2(dx), dx.hypot(dy))
    };
    pts.sort_by(|p, q| {
        let (ap, dp) = key(p);
        let (aq, dq) = key(q);
        ap.total_cmp(&aq).then(dp.total_cmp(&dq))
    });
}

/// Area of a convex anticlockwise polygon as the sum of the triangles fanned
/// out from its first vertex. Fewer than three vertices give zero.
pub fn polygon_area(p: &Polygon) -> f64 {
    let v = &p.vertices;
    if v.len() < 3 {
        return 0.0;
    }
    let o = v[0];
    let twice: f64 = v[1..]
        .windows(2)
        .map(|e| e[0].sub(o).cross(e[1].sub(o)))
        .sum();
    0.5 * twice.abs()
}

/// Intersection over union of two rotated boxes. Symmetric, in `[0, 1]`;
/// boxes that only touch score zero.
pub fn skew_iou(a: &RotatedBox, b: &RotatedBox) -> f64 {
    // Fixed argument order makes the result bitwise symmetric.
    let (a, b) = if a.total_cmp(b) == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    };
    if a.center().distance(b.center()) > a.circumradius() + b.circumradius() {
        return 0.0;
    }
    let inter = polygon_area(&intersection_polygon(a, b));
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Pairwise skew IoU, `out[[i, j]] = skew_iou(&lhs[i], &rhs[j])`. Rows are
/// computed in parallel; each entry is identical to the scalar call.
pub fn skew_iou_matrix(lhs: &[RotatedBox], rhs: &[RotatedBox]) -> Array2<f64> {
    let cols = rhs.len();
    let data: Vec<f64> = lhs
        .par_iter()
        .flat_map_iter(|a| rhs.iter().map(move |b| skew_iou(a, b)))
        .collect();
    Array2::from_shape_vec((lhs.len(), cols), data).expect("row-major shape matches data")
}

/// Converts an `N x 5` array with columns `(x, y, h, w, theta)` into boxes.
pub fn boxes_from_array(rows: ArrayView2<'_, f64>) -> Result<Vec<RotatedBox>> {
    if rows.ncols() != 5 {
        return Err(invalid(format!(
            "box array must have 5 columns (x, y, h, w, theta), got shape {:?}",
            rows.shape()
        )));
    }
    rows.outer_iter()
        .map(|r| RotatedBox::new(r[0], r[1], r[2], r[3], r[4]))
        .collect()
}

/// Inverse of [`boxes_from_array`].
pub fn boxes_to_array(boxes: &[RotatedBox]) -> Array2<f64> {
    let mut out = Array2::zeros((boxes.len(), 5));
    for (mut row, b) in out.outer_iter_mut().zip(boxes) {
        for (dst, v) in row.iter_mut().zip(b.to_array()) {
            *dst = v;
        }
    }
    out
}
