//! Geometry and evaluation kernels for rotation-based text detection.
//!
//! * [`geometry`]: the canonical rotated box, angle arithmetic and skew IoU.
//! * [`anchors`]: rotation anchors over a feature map, border filtering.
//! * [`matching`]: anchor labelling and skew non-maximum suppression.
//! * [`regression`]: box/offset encoding and the detection losses.
//! * [`pooling`]: rotated RoI max pooling.
//! * [`linking`]: merging detections into text lines.
//! * [`dataset`]: annotation formats and annotation-level transforms.
//! * [`eval`]: precision / recall / F-measure.
//! * [`cli`]: the `skewtext` command-line tool.

pub mod anchors;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod linking;
pub mod matching;
pub mod pooling;
pub mod regression;

pub use error::{Error, Result};
pub use geometry::{
    angle_sub, box_vertices, canonicalize, intersection_polygon, normalize_angle, polygon_area,
    rotate_ground_truth, skew_iou, skew_iou_matrix, ImageSize, Point, Polygon, RotatedBox,
};
pub use matching::Detection;
