//! Rotation anchors: a dense lattice of oriented priors over a feature map.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::geometry::{angle_diff, ImageSize, RotatedBox, ANGLE_MAX, ANGLE_MIN};

/// An `h:w` aspect ratio such as `1:5`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AspectRatio {
    pub h: f64,
    pub w: f64,
}

impl AspectRatio {
    pub const fn new(h: f64, w: f64) -> Self {
        Self { h, w }
    }

    /// `w / h`.
    pub fn elongation(&self) -> f64 {
        self.w / self.h
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSpec {
    /// Anchor side, in multiples of the stride, before the ratio adjustment.
    pub scales: Vec<f64>,
    pub aspect_ratios: Vec<AspectRatio>,
    /// Radians, each in `[-pi/4, 3pi/4)`.
    pub orientations: Vec<f64>,
    /// Image pixels per feature-map cell.
    pub stride: f64,
}

impl Default for AnchorSpec {
    fn default() -> Self {
        Self {
            scales: vec![8.0, 16.0, 32.0],
            aspect_ratios: vec![
                AspectRatio::new(1.0, 2.0),
                AspectRatio::new(1.0, 5.0),
                AspectRatio::new(1.0, 8.0),
            ],
            orientations: vec![
                -PI / 6.0,
                0.0,
                PI / 6.0,
                PI / 3.0,
                PI / 2.0,
                2.0 * PI / 3.0,
            ],
            stride: 16.0,
        }
    }
}

impl AnchorSpec {
    pub fn anchors_per_location(&self) -> usize {
        self.scales.len() * self.aspect_ratios.len() * self.orientations.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.scales.is_empty() || self.aspect_ratios.is_empty() || self.orientations.is_empty() {
            return Err(invalid("anchor scales, ratios and orientations must be non-empty"));
        }
        if !(self.stride.is_finite() && self.stride > 0.0) {
            return Err(invalid(format!("stride must be positive, got {}", self.stride)));
        }
        if let Some(s) = self.scales.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(invalid(format!("anchor scale must be positive, got {s}")));
        }
        if let Some(r) = self
            .aspect_ratios
            .iter()
            .find(|r| !(r.h.is_finite() && r.w.is_finite() && r.h > 0.0 && r.w > 0.0))
        {
            return Err(invalid(format!("aspect ratio must be positive, got {}:{}", r.h, r.w)));
        }
        if let Some(o) = self
            .orientations
            .iter()
            .find(|o| !(ANGLE_MIN..ANGLE_MAX).contains(*o))
        {
            return Err(invalid(format!("orientation {o} outside [-pi/4, 3pi/4)")));
        }
        Ok(())
    }

    /// Index of the orientation whose fit domain contains `theta`: the
    /// nearest orientation modulo `pi`, ties going to the lower index.
    pub fn fit_domain(&self, theta: f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, &o) in self.orientations.iter().enumerate() {
            let d = angle_diff(theta, o);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    /// Anchor shapes for one location, in grid order (orientation, then
    /// ratio, then scale). Centers are at the origin.
    fn location_template(&self) -> Result<Vec<RotatedBox>> {
        let mut out = Vec::with_capacity(self.anchors_per_location());
        for &theta in &self.orientations {
            for ratio in &self.aspect_ratios {
                let r = ratio.elongation().sqrt();
                for &scale in &self.scales {
                    let side = scale * self.stride;
                    out.push(RotatedBox::new(0.0, 0.0, side / r, side * r, theta)?);
                }
            }
        }
        Ok(out)
    }
}

/// Every anchor of a `feat_height x feat_width` feature map.
///
/// `boxes` is row-major over `(row, col)`; within a location anchors run over
/// orientation, then aspect ratio, then scale, so
/// `index = ((row * W + col) * n_orient + o) * n_ratio * n_scale + r * n_scale + s`.
#[derive(Debug, Clone)]
pub struct AnchorGrid {
    pub spec: AnchorSpec,
    pub feat_width: usize,
    pub feat_height: usize,
    pub boxes: Vec<RotatedBox>,
}

impl AnchorGrid {
    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }
}

/// Slides the anchor template over the feature map. Each cell's anchors are
/// centered at `((col + 0.5) * stride, (row + 0.5) * stride)` and have area
/// `(scale * stride)^2`.
pub fn generate_anchors(spec: &AnchorSpec, feat_w: usize, feat_h: usize) -> Result<AnchorGrid> {
    spec.validate()?;
    if feat_w == 0 || feat_h == 0 {
        return Err(invalid(format!(
            "feature map must be at least 1x1, got {feat_w}x{feat_h}"
        )));
    }
    let template = spec.location_template()?;
    let mut boxes = Vec::with_capacity(feat_w * feat_h * template.len());
    for row in 0..feat_h {
        let cy = (row as f64 + 0.5) * spec.stride;
        for col in 0..feat_w {
            let cx = (col as f64 + 0.5) * spec.stride;
            for t in &template {
                boxes.push(RotatedBox::new(cx, cy, t.h(), t.w(), t.theta())?);
            }
        }
    }
    Ok(AnchorGrid {
        spec: spec.clone(),
        feat_width: feat_w,
        feat_height: feat_h,
        boxes,
    })
}

/// Keeps anchors whose corners all lie inside the image grown by
/// `padding_factor` times its size on every side. Returns `(grid index, box)`.
pub fn filter_border(grid: &AnchorGrid, img: ImageSize, padding_factor: f64) -> Vec<(usize, RotatedBox)> {
    let iw = f64::from(img.width);
    let ih = f64::from(img.height);
    let p = padding_factor.max(0.0);
    let (x0, x1) = (-p * iw, iw * (1.0 + p));
    let (y0, y1) = (-p * ih, ih * (1.0 + p));
    grid.boxes
        .iter()
        .enumerate()
        .filter(|(_, b)| {
            b.vertices()
                .iter()
                .all(|v| v.x >= x0 && v.x <= x1 && v.y >= y0 && v.y <= y1)
        })
        .map(|(i, b)| (i, *b))
        .collect()
}
