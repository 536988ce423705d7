//! Precision / recall / F-measure with one-to-one skew-IoU matching.
//!
//! This is a simplified protocol, not the official ICDAR or DetEval scripts:
//! detections are matched greedily in descending score order to the unmatched
//! readable ground truth they overlap most, and a match needs IoU strictly
//! above the threshold. Unreadable ground truth acts as a don't-care region: a
//! detection that fails to match a readable instance but overlaps an
//! unreadable one above the threshold is left out of the precision
//! denominator.

use std::iter::Sum;
use std::ops::Add;

use rayon::prelude::*;

use crate::dataset::GroundTruthInstance;
use crate::error::{invalid, Result};
use crate::geometry::skew_iou;
use crate::matching::Detection;

/// Integer tallies behind the three rates. Summing counts over images gives
/// the corpus-level figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalCounts {
    pub matched: usize,
    /// Detections that count towards precision (don't-cares excluded).
    pub detections: usize,
    /// Readable ground-truth instances.
    pub ground_truths: usize,
}

impl EvalCounts {
    pub fn precision(&self) -> f64 {
        ratio(self.matched, self.detections)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.matched, self.ground_truths)
    }

    pub fn f_measure(&self) -> f64 {
        let p = self.precision();
        let r = self.recall();
        if p + r > 0.0 {
            2.0 * p * r / (p + r)
        } else {
            0.0
        }
    }
}

fn ratio(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

impl Add for EvalCounts {
    type Output = EvalCounts;

    fn add(self, o: EvalCounts) -> EvalCounts {
        EvalCounts {
            matched: self.matched + o.matched,
            detections: self.detections + o.detections,
            ground_truths: self.ground_truths + o.ground_truths,
        }
    }
}

impl Sum for EvalCounts {
    fn sum<I: Iterator<Item = EvalCounts>>(iter: I) -> Self {
        iter.fold(EvalCounts::default(), Add::add)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    /// `(detection index, ground-truth index)` pairs.
    pub matches: Vec<(usize, usize)>,
    /// Detections excluded as don't-care.
    pub dont_care: Vec<usize>,
    pub counts: EvalCounts,
}

impl EvalResult {
    fn from_counts(counts: EvalCounts, matches: Vec<(usize, usize)>, dont_care: Vec<usize>) -> Self {
        Self {
            precision: counts.precision(),
            recall: counts.recall(),
            f_measure: counts.f_measure(),
            matches,
            dont_care,
            counts,
        }
    }
}

fn check_threshold(iou_thresh: f64) -> Result<()> {
    if !(iou_thresh > 0.0 && iou_thresh < 1.0) {
        return Err(invalid(format!("IoU threshold must lie in (0, 1), got {iou_thresh}")));
    }
    Ok(())
}

/// Scores one image's detections against its ground truth.
pub fn evaluate(dets: &[Detection], gts: &[GroundTruthInstance], iou_thresh: f64) -> Result<EvalResult> {
    check_threshold(iou_thresh)?;
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score.total_cmp(&dets[a].score));

    let mut gt_taken = vec![false; gts.len()];
    let mut matches = Vec::new();
    let mut dont_care = Vec::new();

    for d in order {
        let bbox = &dets[d].bbox;
        let mut best: Option<(usize, f64)> = None;
        for (g, gt) in gts.iter().enumerate() {
            if !gt.readable || gt_taken[g] {
                continue;
            }
            let iou = skew_iou(bbox, &gt.bbox);
            if best.is_none_or(|(_, b)| iou > b) {
                best = Some((g, iou));
            }
        }
        match best {
            Some((g, iou)) if iou > iou_thresh => {
                gt_taken[g] = true;
                matches.push((d, g));
            }
            _ => {
                if gts.iter().any(|gt| !gt.readable && skew_iou(bbox, &gt.bbox) > iou_thresh) {
                    dont_care.push(d);
                }
            }
        }
    }

    let counts = EvalCounts {
        matched: matches.len(),
        detections: dets.len() - dont_care.len(),
        ground_truths: gts.iter().filter(|g| g.readable).count(),
    };
    Ok(EvalResult::from_counts(counts, matches, dont_care))
}

/// Evaluates a set of images and pools their counts. Images are scored in
/// parallel; the aggregate only sums integers, so it does not depend on the
/// schedule. Returns the pooled result (with empty match lists) and the
/// per-image results in input order.
pub fn evaluate_corpus(
    images: &[(Vec<Detection>, Vec<GroundTruthInstance>)],
    iou_thresh: f64,
) -> Result<(EvalResult, Vec<EvalResult>)> {
    check_threshold(iou_thresh)?;
    let per_image: Vec<EvalResult> = images
        .par_iter()
        .map(|(d, g)| evaluate(d, g, iou_thresh))
        .collect::<Result<_>>()?;
    let total: EvalCounts = per_image.iter().map(|r| r.counts).sum();
    Ok((EvalResult::from_counts(total, Vec::new(), Vec::new()), per_image))
}
