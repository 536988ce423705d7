//! Command-line front end. Each subcommand reads its inputs, calls one
//! library routine and prints the result; see `skewtext --help`.
//!
//! Results go to the output writer, diagnostics to the error writer. Numbers
//! are printed with six decimals.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use crate::anchors::{filter_border, generate_anchors, AnchorSpec};
use crate::dataset::{
    enlarge_context, parse_detections, parse_gt, serialize_gt, to_horizontal, write_detections, GtFormat,
};
use crate::eval::evaluate_corpus;
use crate::geometry::{rotate_ground_truth, skew_iou_matrix, ImageSize, RotatedBox};
use crate::linking::{link_detections, LinkConfig};
use crate::matching::{skew_nms, Detection, NmsConfig};

/// An angle given in radians, or in degrees with a `deg` suffix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle(pub f64);

impl FromStr for Angle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (num, deg) = match s.strip_suffix("deg") {
            Some(n) => (n.trim(), true),
            None => (s, false),
        };
        let v: f64 = num.parse().map_err(|_| format!("invalid angle '{s}'"))?;
        if !v.is_finite() {
            return Err(format!("invalid angle '{s}'"));
        }
        Ok(Angle(if deg { v.to_radians() } else { v }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FileFormat {
    /// `cx cy w h theta score` detections.
    Dets,
    Msra,
    Icdar13,
    Icdar15,
}

impl FileFormat {
    fn gt_format(self) -> Option<GtFormat> {
        match self {
            FileFormat::Dets => None,
            FileFormat::Msra => Some(GtFormat::Msra),
            FileFormat::Icdar13 => Some(GtFormat::Icdar13),
            FileFormat::Icdar15 => Some(GtFormat::Icdar15),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GtFileFormat {
    Msra,
    Icdar13,
    Icdar15,
}

impl From<GtFileFormat> for GtFormat {
    fn from(f: GtFileFormat) -> Self {
        match f {
            GtFileFormat::Msra => GtFormat::Msra,
            GtFileFormat::Icdar13 => GtFormat::Icdar13,
            GtFileFormat::Icdar15 => GtFormat::Icdar15,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "skewtext", version, about = "Rotated text-box geometry and evaluation tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Skew IoU between every box of A (rows) and of B (columns).
    Iou {
        file_a: PathBuf,
        file_b: PathBuf,
        #[arg(long, value_enum, default_value = "dets")]
        format: FileFormat,
    },
    /// Skew non-maximum suppression over a detection file.
    Nms {
        dets: PathBuf,
        #[arg(long, default_value_t = 0.7)]
        iou_keep: f64,
        #[arg(long, default_value_t = 0.3)]
        iou_low: f64,
        #[arg(long, default_value = "15deg")]
        angle_limit: Angle,
    },
    /// Precision, recall and F-measure of a detection directory against a
    /// ground-truth directory with matching file names.
    Eval {
        dets_dir: PathBuf,
        gts_dir: PathBuf,
        #[arg(long, value_enum)]
        format: GtFileFormat,
        #[arg(long, default_value_t = 0.5)]
        iou: f64,
        /// Replace each detection by its enclosing horizontal rectangle.
        #[arg(long)]
        horizontal: bool,
    },
    /// Merge collinear detections into text lines.
    Link {
        dets: PathBuf,
        /// Degrees.
        #[arg(long, default_value_t = 10.0)]
        angle_threshold: f64,
    },
    /// Rotate ground truth with the image and enlarge it for context.
    Augment {
        gt_file: PathBuf,
        #[arg(long, value_enum)]
        format: GtFileFormat,
        #[arg(long, default_value = "0")]
        alpha: Angle,
        #[arg(long)]
        image_w: Option<u32>,
        #[arg(long)]
        image_h: Option<u32>,
        #[arg(long, default_value_t = 1.4)]
        enlarge: f64,
    },
    /// Dump the rotation anchors of a feature map, optionally dropping those
    /// that cross the (padded) image border.
    Anchors {
        #[arg(long)]
        feat_w: usize,
        #[arg(long)]
        feat_h: usize,
        #[arg(long, default_value_t = 16.0)]
        stride: f64,
        #[arg(long)]
        image_w: Option<u32>,
        #[arg(long)]
        image_h: Option<u32>,
        #[arg(long, default_value_t = 0.25)]
        padding: f64,
    },
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_dets(path: &Path) -> anyhow::Result<Vec<Detection>> {
    parse_detections(&read(path)?).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn load_boxes(path: &Path, format: FileFormat) -> anyhow::Result<Vec<RotatedBox>> {
    let text = read(path)?;
    let boxes = match format.gt_format() {
        None => parse_detections(&text).map(|d| d.into_iter().map(|d| d.bbox).collect()),
        Some(f) => parse_gt(f, &text).map(|g| g.into_iter().map(|g| g.bbox).collect()),
    };
    boxes.map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn image_size(w: Option<u32>, h: Option<u32>) -> anyhow::Result<Option<ImageSize>> {
    match (w, h) {
        (Some(w), Some(h)) => Ok(Some(ImageSize::new(w, h)?)),
        (None, None) => Ok(None),
        _ => bail!("--image-w and --image-h must be given together"),
    }
}

fn list_files(dir: &Path) -> anyhow::Result<BTreeSet<String>> {
    let mut names = BTreeSet::new();
    for entry in fs::read_dir(dir).with_context(|| format!("cannot list {}", dir.display()))? {
        let entry = entry?;
        if entry.file_type()?.is_file() {
            names.insert(entry.file_name().to_string_lossy().into_owned());
        }
    }
    Ok(names)
}

/// Executes a parsed command line.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<()> {
    match cli.command {
        Command::Iou { file_a, file_b, format } => {
            let a = load_boxes(&file_a, format)?;
            let b = load_boxes(&file_b, format)?;
            let m = skew_iou_matrix(&a, &b);
            for row in m.outer_iter() {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
                writeln!(out, "{}", cells.join(" "))?;
            }
        }
        Command::Nms {
            dets,
            iou_keep,
            iou_low,
            angle_limit,
        } => {
            let dets = load_dets(&dets)?;
            let cfg = NmsConfig {
                iou_keep,
                iou_low,
                angle_limit: angle_limit.0,
            };
            out.write_all(write_detections(&skew_nms(&dets, &cfg)?).as_bytes())?;
        }
        Command::Eval {
            dets_dir,
            gts_dir,
            format,
            iou,
            horizontal,
        } => {
            let det_names = list_files(&dets_dir)?;
            let gt_names = list_files(&gts_dir)?;
            let missing: Vec<&String> = det_names.difference(&gt_names).collect();
            if !missing.is_empty() {
                let names: Vec<&str> = missing.iter().map(|s| s.as_str()).collect();
                bail!("missing ground truth for: {}", names.join(", "));
            }
            let mut images = Vec::with_capacity(gt_names.len());
            for name in &gt_names {
                let mut dets = if det_names.contains(name) {
                    load_dets(&dets_dir.join(name))?
                } else {
                    Vec::new()
                };
                if horizontal {
                    for d in &mut dets {
                        d.bbox = to_horizontal(&d.bbox);
                    }
                }
                let path = gts_dir.join(name);
                let gts = parse_gt(format.into(), &read(&path)?).map_err(|e| anyhow!("{}: {e}", path.display()))?;
                images.push((dets, gts));
            }
            let (total, per_image) = evaluate_corpus(&images, iou)?;
            for (name, r) in gt_names.iter().zip(&per_image) {
                writeln!(
                    out,
                    "{name} P={:.4} R={:.4} F={:.4}",
                    r.precision, r.recall, r.f_measure
                )?;
            }
            writeln!(
                out,
                "P={:.4} R={:.4} F={:.4}",
                total.precision, total.recall, total.f_measure
            )?;
        }
        Command::Link { dets, angle_threshold } => {
            let dets = load_dets(&dets)?;
            let merged = link_detections(&dets, &LinkConfig { angle_threshold })?;
            out.write_all(write_detections(&merged).as_bytes())?;
        }
        Command::Augment {
            gt_file,
            format,
            alpha,
            image_w,
            image_h,
            enlarge,
        } => {
            let format: GtFormat = format.into();
            let mut gts = parse_gt(format, &read(&gt_file)?).map_err(|e| anyhow!("{}: {e}", gt_file.display()))?;
            let img = image_size(image_w, image_h)?;
            for g in &mut gts {
                if alpha.0 != 0.0 {
                    let img = img.ok_or_else(|| anyhow!("--image-w and --image-h are required when --alpha is non-zero"))?;
                    g.bbox = rotate_ground_truth(&g.bbox, alpha.0, img)?;
                }
                g.bbox = enlarge_context(&g.bbox, enlarge)?;
            }
            out.write_all(serialize_gt(format, &gts).as_bytes())?;
        }
        Command::Anchors {
            feat_w,
            feat_h,
            stride,
            image_w,
            image_h,
            padding,
        } => {
            let spec = AnchorSpec {
                stride,
                ..AnchorSpec::default()
            };
            let grid = generate_anchors(&spec, feat_w, feat_h)?;
            let kept: Vec<(usize, RotatedBox)> = match image_size(image_w, image_h)? {
                Some(img) => filter_border(&grid, img, padding),
                None => grid.boxes.iter().copied().enumerate().collect(),
            };
            for (i, b) in &kept {
                writeln!(
                    out,
                    "{i} {:.6} {:.6} {:.6} {:.6} {:.6}",
                    b.x(),
                    b.y(),
                    b.w(),
                    b.h(),
                    b.theta()
                )?;
            }
            writeln!(err, "kept {} of {} anchors", kept.len(), grid.len())?;
        }
    }
    Ok(())
}

/// Parses `args` and runs; returns the process exit code. Errors are written
/// to `err`.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            if e.use_stderr() {
                let _ = write!(err, "{e}");
            } else {
                let _ = write!(out, "{e}");
            }
            return code;
        }
    };
    match run(cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_syntax() {
        assert_eq!("0.5".parse::<Angle>().unwrap(), Angle(0.5));
        let a: Angle = "15deg".parse().unwrap();
        assert!((a.0 - std::f64::consts::PI / 12.0).abs() < 1e-15);
        assert!("abc".parse::<Angle>().is_err());
        assert!("inf".parse::<Angle>().is_err());
    }

    #[test]
    fn bad_flags_exit_nonzero() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(main_with(["skewtext", "frobnicate"], &mut o, &mut e), 2);
        assert!(!e.is_empty());
    }
}
