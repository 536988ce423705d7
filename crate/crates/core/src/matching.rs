//! Anchor labelling against ground truth and skew non-maximum suppression.

use std::f64::consts::PI;

use ndarray::{Array2, ArrayView2};

use crate::error::{invalid, Result};
use crate::geometry::{angle_diff, skew_iou, skew_iou_matrix, RotatedBox};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchLabel {
    /// Matched to the ground truth at this index.
    Positive(usize),
    Negative,
    /// Neither positive nor negative; excluded from training.
    Ignore,
}

impl MatchLabel {
    pub fn is_positive(&self) -> bool {
        matches!(self, MatchLabel::Positive(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchConfig {
    pub pos_iou: f64,
    pub neg_iou: f64,
    /// Largest orientation difference (radians, exclusive) for a positive.
    pub angle_limit: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            pos_iou: 0.7,
            neg_iou: 0.3,
            angle_limit: PI / 12.0,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.neg_iou && self.neg_iou < self.pos_iou && self.pos_iou <= 1.0) {
            return Err(invalid(format!(
                "need 0 <= neg_iou < pos_iou <= 1, got neg={} pos={}",
                self.neg_iou, self.pos_iou
            )));
        }
        if !(self.angle_limit > 0.0 && self.angle_limit <= std::f64::consts::FRAC_PI_2) {
            return Err(invalid(format!(
                "angle limit must lie in (0, pi/2], got {}",
                self.angle_limit
            )));
        }
        Ok(())
    }
}

/// A scored box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub bbox: RotatedBox,
    pub score: f64,
}

impl Detection {
    pub fn new(bbox: RotatedBox, score: f64) -> Result<Self> {
        if !(score.is_finite() && (0.0..=1.0).contains(&score)) {
            return Err(invalid(format!("score must lie in [0, 1], got {score}")));
        }
        Ok(Self { bbox, score })
    }
}

/// Labels every anchor as positive, negative or ignored.
///
/// An anchor is positive for its best-overlapping ground truth `g` when its
/// orientation is within `angle_limit` of `g` and either its IoU exceeds
/// `pos_iou` or it is the highest-IoU anchor for `g` among the anchors whose
/// orientation fits `g`. An anchor that is the highest for some other ground
/// truth (and fits it) but not positive for its best one is bound to that
/// ground truth instead, so each fitted ground truth gets at least one
/// positive. The remaining anchors are negative when their best IoU is below
/// `neg_iou`, or above `pos_iou` with a misfit angle, and ignored otherwise.
///
/// With no ground truth every anchor is negative.
pub fn assign_labels(anchors: &[RotatedBox], gts: &[RotatedBox], cfg: &MatchConfig) -> Result<Vec<MatchLabel>> {
    cfg.validate()?;
    if gts.is_empty() {
        return Ok(vec![MatchLabel::Negative; anchors.len()]);
    }
    let ious = skew_iou_matrix(anchors, gts);
    let angles = angle_matrix(anchors, gts);
    label_from_overlaps(ious.view(), angles.view(), cfg)
}

/// `out[[i, j]] = angle_diff(anchors[i].theta, gts[j].theta)`.
pub fn angle_matrix(anchors: &[RotatedBox], gts: &[RotatedBox]) -> Array2<f64> {
    Array2::from_shape_fn((anchors.len(), gts.len()), |(i, j)| {
        angle_diff(anchors[i].theta(), gts[j].theta())
    })
}

/// The labelling rule of [`assign_labels`], driven by a precomputed
/// anchors x ground-truth IoU matrix and orientation-difference matrix.
pub fn label_from_overlaps(ious: ArrayView2<'_, f64>, angles: ArrayView2<'_, f64>, cfg: &MatchConfig) -> Result<Vec<MatchLabel>> {
    cfg.validate()?;
    if ious.shape() != angles.shape() {
        return Err(invalid(format!(
            "IoU matrix {:?} and angle matrix {:?} differ in shape",
            ious.shape(),
            angles.shape()
        )));
    }
    let (n_anchors, n_gts) = ious.dim();
    if n_gts == 0 {
        return Ok(vec![MatchLabel::Negative; n_anchors]);
    }
    let fits = |a: usize, g: usize| angles[[a, g]] < cfg.angle_limit;

    // Highest IoU per ground truth among the anchors that fit it.
    let best_fit: Vec<Option<f64>> = (0..n_gts)
        .map(|g| {
            (0..n_anchors)
                .filter(|&a| fits(a, g))
                .map(|a| ious[[a, g]])
                .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |m| m.max(v))))
                .filter(|&m| m > 0.0)
        })
        .collect();
    let is_best_for = |a: usize, g: usize| fits(a, g) && best_fit[g] == Some(ious[[a, g]]);

    let labels = (0..n_anchors)
        .map(|a| {
            let mut best_g = 0;
            for g in 1..n_gts {
                if ious[[a, g]] > ious[[a, best_g]] {
                    best_g = g;
                }
            }
            let max_iou = ious[[a, best_g]];

            if fits(a, best_g) && (max_iou > cfg.pos_iou || is_best_for(a, best_g)) {
                return MatchLabel::Positive(best_g);
            }
            if let Some(g) = (0..n_gts).find(|&g| is_best_for(a, g)) {
                return MatchLabel::Positive(g);
            }
            if max_iou < cfg.neg_iou || max_iou > cfg.pos_iou {
                // Above pos_iou here means the orientation did not fit.
                MatchLabel::Negative
            } else {
                MatchLabel::Ignore
            }
        })
        .collect();
    Ok(labels)
}

/// Thresholds for [`skew_nms`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmsConfig {
    pub iou_keep: f64,
    pub iou_low: f64,
    pub angle_limit: f64,
}

impl Default for NmsConfig {
    fn default() -> Self {
        Self {
            iou_keep: 0.7,
            iou_low: 0.3,
            angle_limit: PI / 12.0,
        }
    }
}

impl NmsConfig {
    /// Whether a kept box suppresses a lower-scored one, given their IoU and
    /// orientation difference.
    #[inline]
    pub fn suppresses(&self, iou: f64, angle: f64) -> bool {
        iou > self.iou_keep || (iou >= self.iou_low && iou <= self.iou_keep && angle < self.angle_limit)
    }
}

/// Greedy skew NMS.
///
/// Detections are visited by descending score (ties by input order). A
/// detection is dropped when some already-kept detection overlaps it with IoU
/// above `iou_keep`, or with IoU in `[iou_low, iou_keep]` and an orientation
/// difference below `angle_limit`. The output keeps visiting order.
pub fn skew_nms(dets: &[Detection], cfg: &NmsConfig) -> Result<Vec<Detection>> {
    Ok(skew_nms_indices(dets, cfg)?.into_iter().map(|i| dets[i]).collect())
}

/// Like [`skew_nms`], returning indices into `dets`.
pub fn skew_nms_indices(dets: &[Detection], cfg: &NmsConfig) -> Result<Vec<usize>> {
    if cfg.iou_low.is_nan() || cfg.iou_keep.is_nan() || cfg.iou_low >= cfg.iou_keep {
        return Err(invalid(format!(
            "iou_low ({}) must be below iou_keep ({})",
            cfg.iou_low, cfg.iou_keep
        )));
    }
    if let Some(d) = dets.iter().find(|d| !d.score.is_finite()) {
        return Err(invalid(format!("non-finite detection score {}", d.score)));
    }
    let mut order: Vec<usize> = (0..dets.len()).collect();
    // Stable sort keeps input order among equal scores.
    order.sort_by(|&a, &b| dets[b].score.total_cmp(&dets[a].score));

    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        let d = &dets[i].bbox;
        let dominated = kept.iter().any(|&k| {
            let kb = &dets[k].bbox;
            cfg.suppresses(skew_iou(kb, d), angle_diff(kb.theta(), d.theta()))
        });
        if !dominated {
            kept.push(i);
        }
    }
    Ok(kept)
}
