//! Greedy pairwise merging of short collinear detections into text lines.

use crate::error::{invalid, Result};
use crate::geometry::RotatedBox;
use crate::matching::Detection;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkConfig {
    /// Maximum difference, in degrees, between the first box's orientation
    /// and the direction joining the two centers.
    pub angle_threshold: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            angle_threshold: 10.0,
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.angle_threshold.is_finite() && self.angle_threshold > 0.0) {
            return Err(invalid(format!(
                "angle threshold must be positive, got {}",
                self.angle_threshold
            )));
        }
        Ok(())
    }
}

/// Absolute slope angle, in degrees, of the segment from `a` to `b`. A
/// vertical segment is 90.
fn center_gradient_deg(a: &RotatedBox, b: &RotatedBox) -> f64 {
    let dx = b.x() - a.x();
    let dy = b.y() - a.y();
    if dx == 0.0 {
        90.0
    } else {
        (dy / dx).atan().abs().to_degrees()
    }
}

/// Whether `b` should be folded into `a`.
fn links(a: &RotatedBox, b: &RotatedBox, cfg: &LinkConfig) -> bool {
    let mean_width = (a.w() + b.w()) / 2.0;
    let dist = a.center().distance(b.center());
    let grad = center_gradient_deg(a, b);
    dist < mean_width && (grad - a.theta().to_degrees()).abs() < cfg.angle_threshold
}

/// Midpoint center, mean height, summed width, mean orientation.
fn merge(a: &RotatedBox, b: &RotatedBox) -> Result<RotatedBox> {
    RotatedBox::new(
        (a.x() + b.x()) / 2.0,
        (a.y() + b.y()) / 2.0,
        (a.h() + b.h()) / 2.0,
        a.w() + b.w(),
        (a.theta() + b.theta()) / 2.0,
    )
}

/// Runs the pairwise pass over `(i, j)` with `i < j` in ascending order. A
/// merge replaces `i` in place and retires `j`; later pairs see the merged
/// box. Returns the surviving slots, in input order, together with the list
/// of input indices folded into each.
fn link_pass(boxes: &[RotatedBox], cfg: &LinkConfig) -> Result<Vec<(RotatedBox, Vec<usize>)>> {
    cfg.validate()?;
    let mut current: Vec<RotatedBox> = boxes.to_vec();
    let mut members: Vec<Vec<usize>> = (0..boxes.len()).map(|i| vec![i]).collect();
    let mut valid = vec![true; boxes.len()];

    for i in 0..current.len() {
        for j in i + 1..current.len() {
            if !valid[i] || !valid[j] {
                continue;
            }
            if links(&current[i], &current[j], cfg) {
                current[i] = merge(&current[i], &current[j])?;
                valid[j] = false;
                let moved = std::mem::take(&mut members[j]);
                members[i].extend(moved);
            }
        }
    }
    Ok(current
        .into_iter()
        .zip(members)
        .zip(valid)
        .filter(|(_, v)| *v)
        .map(|(pair, _)| pair)
        .collect())
}

/// Merges proposals that lie along each other's text direction.
pub fn link_text_segments(proposals: &[RotatedBox], cfg: &LinkConfig) -> Result<Vec<RotatedBox>> {
    Ok(link_pass(proposals, cfg)?.into_iter().map(|(b, _)| b).collect())
}

/// [`link_text_segments`] over scored detections. A merged detection carries
/// the highest score among the pieces it absorbed.
pub fn link_detections(dets: &[Detection], cfg: &LinkConfig) -> Result<Vec<Detection>> {
    let boxes: Vec<RotatedBox> = dets.iter().map(|d| d.bbox).collect();
    link_pass(&boxes, cfg)?
        .into_iter()
        .map(|(b, idx)| {
            let score = idx.iter().map(|&i| dets[i].score).fold(f64::NEG_INFINITY, f64::max);
            Detection::new(b, score)
        })
        .collect()
}
